#include "measinf/random.hpp"

#include <cstdlib>
#include <string>

#include "measinf/error.hpp"

namespace measinf::random {

std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

unsigned resolve_threads(std::optional<unsigned> requested) {
    if (requested) return std::max(1u, *requested);
    if (const char* env = std::getenv("MEASURE_INFINITY_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
        throw Error(ErrorCode::InvalidConfig, std::string("MEASURE_INFINITY_THREADS must be a positive integer, got '") +
                                                  env + "'");
    }
    return 1;
}

} // namespace measinf::random
