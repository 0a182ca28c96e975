#include <doctest.h>

TEST_SUITE("model") {

}  // TEST_SUITE
