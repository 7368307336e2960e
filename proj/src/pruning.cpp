#include "vent/pruning.hpp"

#include <sstream>

namespace vent {

double path_mass_dp(const BlockGraph& g, std::vector<double>* node_mass) {
    for (const auto& e : g.edges)
        if (e.src < 0 || e.dst >= g.n_nodes || e.src >= e.dst)
            throw ContractError("path_mass_dp: edge " + std::to_string(e.src) + "->" +
                                std::to_string(e.dst) + " is not forward-directed");
    std::vector<double> mass(g.n_nodes, 0.0);
    mass[g.source] = 1.0;
    // node ids are topologically ordered, one sweep suffices
    for (int v = 0; v < g.n_nodes; ++v)
        for (const auto& e : g.edges)
            if (e.dst == v) mass[v] += mass[e.src] * e.weight;
    if (node_mass) *node_mass = mass;
    return mass[g.sink];
}

std::string PruneSummary::to_kv_text() const {
    std::ostringstream os;
    os << "sparsity=" << sparsity << "\n"
       << "scope=" << scope << "\n"
       << "pattern=" << pattern << "\n"
       << "skip_density=" << skip_density << "\n"
       << "params_before=" << params_before << "\n"
       << "params_after=" << params_after << "\n"
       << "connectivity_before=" << connectivity_before << "\n"
       << "connectivity_after=" << connectivity_after << "\n";
    return os.str();
}

}  // namespace vent
