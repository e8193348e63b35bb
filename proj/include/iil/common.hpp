#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace iil {

// All stochastic components draw from this engine so a seed fixes a whole run.
using Rng = std::mt19937_64;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class InvalidArchitecture : public Error {
 public:
  using Error::Error;
};

class InvalidBatch : public Error {
 public:
  using Error::Error;
};

class EmptyBuffer : public Error {
 public:
  using Error::Error;
};

class ActionKindError : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class NoCorrection : public Error {
 public:
  using Error::Error;
};

class ModelNotReady : public Error {
 public:
  using Error::Error;
};

class SourceUnavailable : public Error {
 public:
  using Error::Error;
};

class LoadError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace iil
