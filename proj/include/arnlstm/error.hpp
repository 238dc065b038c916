#pragma once

#include <stdexcept>
#include <string>

namespace arnlstm {

// Each subclass maps to a distinct CLI exit code (see tools/arnlstm.cpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace arnlstm
