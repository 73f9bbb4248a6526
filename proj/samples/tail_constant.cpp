// Reproduces the closed-form kernel tail omega_n / (2 s r^{2s}) by node
// quadrature plus the analytic remainder beyond the box.
#include <cstdio>

#include "fracreg/assembly.hpp"

int main() {
  using namespace fracreg;
  const double s = 0.5, r = 1.0, R = 32.0;
  const double exact = kernel_tail(2, s, r);
  for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    const Grid g = Grid::box(2, h, R);
    const double q = tail_integral(GridFunction::constant(g, 1.0), r, s);
    std::printf("h = 1/%-3.0f  quadrature = %.6f  exact = %.6f  rel.err = %.3e\n", 1.0 / h, q, exact,
                std::abs(q - exact) / exact);
  }
}
