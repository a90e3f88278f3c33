#pragma once

#include <cstdint>
#include <stdexcept>

namespace evoport::moea {

struct EaParams {
    std::size_t population_size = 100;
    std::size_t generations = 100;
    double mutation_rate = 0.01;
    std::size_t archive_size = 100; // SPEA2 environmental-selection archive
    std::uint64_t rng_seed = 0;
    double sbx_eta = 15.0;      // SBX distribution index
    double mutation_eta = 20.0; // polynomial-mutation distribution index

    void validate() const {
        if (population_size < 2)
            throw std::invalid_argument("EaParams: population_size must be >= 2");
        if (generations < 1)
            throw std::invalid_argument("EaParams: generations must be >= 1");
        if (mutation_rate < 0.0 || mutation_rate > 1.0)
            throw std::invalid_argument("EaParams: mutation_rate must be in [0,1]");
        if (archive_size < 1)
            throw std::invalid_argument("EaParams: archive_size must be >= 1");
        if (sbx_eta <= 0.0 || mutation_eta <= 0.0)
            throw std::invalid_argument("EaParams: distribution indices must be positive");
    }
};

} // namespace evoport::moea
