#pragma once

#include <stdexcept>
#include <string>

namespace curvetrack {

// Error taxonomy shared by the library and the CLI exit-code mapping:
//   param_error      -> exit 2 (bad arguments, bad config, CFL violations)
//   degenerate_error -> exit 3 (degenerate inputs, filter collapse)
//   io_error         -> exit 4 (file system, decode, encode)
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class param_error : public error {
public:
    using error::error;
};

class degenerate_error : public error {
public:
    using error::error;
};

class io_error : public error {
public:
    using error::error;
};

// Advection step exceeds the per-step displacement bound.
class cfl_error : public param_error {
public:
    using param_error::param_error;
};

}  // namespace curvetrack
