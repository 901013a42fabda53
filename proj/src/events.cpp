#include "recboost/events.hpp"

#include <iostream>
#include <mutex>

namespace recboost {

event_sink stderr_event_sink() {
    return [](const std::string &line) {
        static std::mutex mutex;
        const std::lock_guard lock(mutex);
        std::clog << "[recboost] " << line << '\n';
    };
}

event_sink null_event_sink() {
    return [](const std::string &) {};
}

}  // namespace recboost
