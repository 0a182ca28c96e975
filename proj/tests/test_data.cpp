#include <doctest.h>

TEST_SUITE("data") {

}  // TEST_SUITE
