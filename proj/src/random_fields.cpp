#include "hmcf/random_fields.hpp"

#include "hmcf/curvature_spec.hpp"  // uniform01

#include <random>
#include <stdexcept>

namespace hmcf {

ScalarField band_limited_noise(const DomainPtr& domain, int l_min, int l_max,
                               std::uint64_t seed) {
  if (!domain) throw std::invalid_argument("band_limited_noise: null domain");
  if (l_min < 0 || l_max < l_min || l_max > domain->max_degree())
    throw std::invalid_argument("band_limited_noise: band outside the resolved range");

  std::mt19937_64 rng(seed);
  VectorXd a = VectorXd::Zero(domain->coeff_count());
  for (int i = 0; i < a.size(); ++i) {
    int l = static_cast<int>(domain->coeff_degree()[i]);
    if (l < l_min || l > l_max) continue;
    double amp = 1.0 / ((1.0 + l) * (1.0 + l));
    a[i] = amp * (2.0 * uniform01(rng()) - 1.0);
  }
  VectorXd values = domain->synthesize(a);
  double sup = values.cwiseAbs().maxCoeff();
  if (sup > 0.0) values /= sup;
  return ScalarField{domain, std::move(values)};
}

}  // namespace hmcf
