// SPDX-License-Identifier: Apache-2.0
/**
 * @file types.hpp
 * @brief Core vocabulary types and error classes shared by every module.
 */
#ifndef SEQX_TYPES_HPP
#define SEQX_TYPES_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqx {

using TokenId = std::int32_t;

/// Content tokens only. BOS/EOS never appear inside a Caption.
using Caption = std::vector<TokenId>;
using CaptionView = std::span<const TokenId>;

inline constexpr TokenId kBos = 0;
inline constexpr TokenId kEos = 1;
inline constexpr TokenId kFirstContent = 2;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: shape mismatches, malformed files, invalid configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or gradient during optimisation.
class TrainingDivergence : public Error {
 public:
  using Error::Error;
};

}  // namespace seqx

#endif  // SEQX_TYPES_HPP
