#pragma once

#include <stdexcept>
#include <string>

namespace recboost {

/// Base of every exception thrown by the library.
class error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: configuration, command-line usage, invalid arguments.
class config_error : public error {
  public:
    using error::error;
};

/// Malformed or unreadable data files.
class data_error : public error {
  public:
    using error::error;
};

/// A model and a corpus (or two models) that do not fit together.
class compatibility_error : public error {
  public:
    using error::error;
};

/// Failure inside the boosting loop or a learner fit.
class training_error : public error {
  public:
    using error::error;
};

/// Network or protocol failure when talking to a completion endpoint.
class remote_error : public error {
  public:
    using error::error;
};

}  // namespace recboost
