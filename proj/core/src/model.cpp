#include "simpson/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace simpson {

Domain::Domain(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo_ < hi_) || !std::isfinite(lo_) || !std::isfinite(hi_))
        throw std::invalid_argument("domain requires finite lo < hi");
}

double Domain::excess(double x) const noexcept { return std::max(lo - x, x - hi); }

}  // namespace simpson
