#include <doctest.h>

TEST_SUITE("split") {

}  // TEST_SUITE
