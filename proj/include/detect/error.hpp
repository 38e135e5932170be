#pragma once

#include <stdexcept>
#include <string>

namespace detect {

/// Bad user input: missing files, malformed CSV, unmapped labels, bad flags.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluation data is the training data the bundle was fitted on.
class LeakError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bundle file is internally inconsistent (vocabulary vs. classifier shape, checksum).
class BundleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace detect
