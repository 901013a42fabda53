#pragma once

#include <functional>
#include <string>

namespace recboost {

/// Receives one human-readable line per notable event (fallbacks, rejected rounds, ...).
using event_sink = std::function<void(const std::string &)>;

/// Writes events to std::clog prefixed with "[recboost] ".
event_sink stderr_event_sink();

/// Discards events.
event_sink null_event_sink();

}  // namespace recboost
