#pragma once

#include <stdexcept>
#include <string>

namespace depthpoison {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input files missing, unreadable or malformed.
class IoError : public Error {
public:
    using Error::Error;
};

/// Parameters violate a documented precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace depthpoison
