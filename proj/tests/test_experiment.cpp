#include <doctest.h>

TEST_SUITE("experiment") {

}  // TEST_SUITE
