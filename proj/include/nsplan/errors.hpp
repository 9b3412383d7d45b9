// Copyright 2026 The nsplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NSPLAN_ERRORS_HPP_
#define NSPLAN_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace nsplan
{

// Base for every error thrown by the library. The CLI maps these to exit
// codes; tests rely on no other exception type escaping public entry points.
class Error : public std::runtime_error
{
public:
  explicit Error(const std::string & msg) : std::runtime_error(msg) {}
};

// Bad or inconsistent configuration (files, flags, env overrides).
class ConfigError : public Error
{
public:
  using Error::Error;
};

// An external suggestion source failed (timeout, missing cache entry,
// malformed response). decide() catches this and falls back to axioms.
class GeneratorFailure : public Error
{
public:
  using Error::Error;
};

// arbitrate() called with an empty suggestion list.
class EmptyInput : public Error
{
public:
  using Error::Error;
};

// Tensor/table dimensions disagree with the configured shapes.
class ShapeMismatch : public Error
{
public:
  using Error::Error;
};

class UnknownTemplate : public Error
{
public:
  using Error::Error;
};

// Scripted expert violates the kinematic bounds it must obey.
class InfeasibleExpert : public Error
{
public:
  using Error::Error;
};

// Predicted and expert trajectories cover different horizons.
class HorizonMismatch : public Error
{
public:
  using Error::Error;
};

// Too few frames for a metric that compares consecutive plans.
class InsufficientFrames : public Error
{
public:
  using Error::Error;
};

class FrameNotFound : public Error
{
public:
  using Error::Error;
};

// Training loss became non-finite.
class DivergenceError : public Error
{
public:
  using Error::Error;
};

}  // namespace nsplan

#endif  // NSPLAN_ERRORS_HPP_
