#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "hexedge/linalg.hpp"

int main(int argc, char** argv) {
  hexedge::pin_blas_threads();
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
