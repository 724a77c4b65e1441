#pragma once

#include <stdexcept>
#include <string>

namespace automapper {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text (not valid JSON, unreadable file).
class ParseError : public Error {
public:
    using Error::Error;
};

// Well-formed JSON that violates a schema rule. `field` names the offender.
class SchemaError : public Error {
public:
    SchemaError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class InfeasibleLayer : public Error {
public:
    explicit InfeasibleLayer(std::string layer)
        : Error("layer '" + layer + "' has no feasible mapping (minimal tile does not fit)"),
          layer_(std::move(layer)) {}
    const std::string& layer() const noexcept { return layer_; }

private:
    std::string layer_;
};

class SamplingExhausted : public Error {
public:
    explicit SamplingExhausted(std::string layer)
        : Error("rejection sampling exhausted its attempt cap for layer '" + layer + "'"),
          layer_(std::move(layer)) {}
    const std::string& layer() const noexcept { return layer_; }

private:
    std::string layer_;
};

class SimulationTooLarge : public Error {
public:
    using Error::Error;
};

class InvalidMapping : public Error {
public:
    using Error::Error;
};

class PipelineInfeasible : public Error {
public:
    using Error::Error;
};

class SpaceTooLarge : public Error {
public:
    SpaceTooLarge(std::string size, const std::string& cap)
        : Error("design space has " + size + " points, above the cap of " + cap),
          size_(std::move(size)) {}
    const std::string& size() const noexcept { return size_; }

private:
    std::string size_;
};

}  // namespace automapper
