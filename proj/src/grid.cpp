#include "nsesplit/grid.hpp"

namespace nsesplit {

GridSpec make_grid(int modes_per_dim, double domain_length) {
    if (modes_per_dim < 4 || modes_per_dim % 2 != 0)
        throw std::invalid_argument("make_grid: modes_per_dim must be even and >= 4");
    if (!(domain_length > 0.0))
        throw std::invalid_argument("make_grid: domain_length must be positive");
    GridSpec g;
    g.modes_per_dim = modes_per_dim;
    g.domain_length = domain_length;
    g.dealias_cutoff = modes_per_dim / 3;
    return g;
}

} // namespace nsesplit
