#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace senc {

// Base for every failure raised by the toolkit. The CLI maps ConfigError to
// exit status 2 and every other senc::Error to exit status 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DegenerateLeg : public Error {
public:
    DegenerateLeg(int leg, double length);
    int leg;
    double length_mm;
};

class SingularConfiguration : public Error {
public:
    explicit SingularConfiguration(double condition_number);
    double condition_number;
};

class NoConvergence : public Error {
public:
    NoConvergence(int iterations, double residual_mm);
    int iterations;
    double residual_mm;
};

class NotHomed : public Error {
public:
    using Error::Error;
};

class HomingIncomplete : public Error {
public:
    explicit HomingIncomplete(std::vector<int> channels);
    std::vector<int> channels;
};

class NonPositiveLength : public Error {
public:
    NonPositiveLength(int leg, double length);
    int leg;
    double length_mm;
};

class SweepFailed : public Error {
public:
    SweepFailed(std::size_t failed, std::size_t total);
    std::size_t failed_pairs;
    std::size_t total_pairs;
};

class OutOfRange : public Error {
public:
    OutOfRange(int leg, double length);
    int leg;
    double length_mm;
};

class PacketError : public Error {
public:
    using Error::Error;
};

class BindFailure : public Error {
public:
    using Error::Error;
};

}  // namespace senc
