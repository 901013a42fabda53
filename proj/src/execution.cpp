#include "recboost/execution.hpp"

#include "recboost/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace recboost {

std::string to_string(execution policy) {
    return policy == execution::serial ? "serial" : "parallel";
}

execution parse_execution(std::string_view name) {
    if (name == "serial") {
        return execution::serial;
    }
    if (name == "parallel") {
        return execution::parallel;
    }
    throw config_error("unknown execution policy '" + std::string(name) + "' (expected serial or parallel)");
}

int available_threads() noexcept {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace recboost
