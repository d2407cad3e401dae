// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gascraft {

// Signed 128-bit arithmetic covers every value this pipeline can produce:
// amounts are capped at 1e12 minor units and rates at 5e7 (1e8 scale), so the
// widest intermediate product stays below 1e21 << 2^126.
using i128 = __int128;
using u128 = unsigned __int128;

std::string i128_to_string(i128 v);
i128 i128_from_string(std::string_view s);

enum class ContractType : int {
    InterestRateSwap = 0,
    EquitySwap = 1,
    EquityOption = 2,
    CommodityOption = 3,
    ForeignExchange = 4,
};

inline constexpr int kContractTypeCount = 5;

std::string_view contract_type_name(ContractType t);
ContractType contract_type_from_name(std::string_view name);

// Fixed-point scale for rate-kind values (interest rates, dividend rates,
// FX rates). A stored value of 1e8 means 1.0.
inline constexpr std::int64_t kRateScale = 100000000;

const std::vector<std::string>& currency_whitelist();

enum class ErrorCode {
    MalformedDocument,
    UnknownContractType,
    MissingRequiredPath,
    UnresolvablePath,
    DuplicateVariant,
    DanglingVariableReference,
    EmptyOptionSet,
    UnknownSymbol,
    ValueTypeMismatch,
    LiteralOverflow,
    MissingSelection,
    UnknownSettlementRule,
    ToolchainUnavailable,
    ToolchainTimeout,
    UnparsableOutput,
    ActionOutOfRange,
    DimensionMismatch,
    NonFiniteLoss,
    CorruptCheckpoint,
    SpaceTooLarge,
    ScoreUndefined,
    ConfigError,
    IoError,
};

std::string_view error_code_name(ErrorCode c);

class GascraftError : public std::runtime_error {
  public:
    GascraftError(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw GascraftError(code, message);
}

} // namespace gascraft
