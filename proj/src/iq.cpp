#include "polyrx/iq.hpp"

namespace polyrx {

double energy(const IQStream& x) {
    double e = 0.0;
    for (const cpx& s : x.samples) e += std::norm(s);
    return e;
}

double mean_power(const IQStream& x) {
    if (x.samples.empty()) return 0.0;
    return energy(x) / static_cast<double>(x.samples.size());
}

}  // namespace polyrx
