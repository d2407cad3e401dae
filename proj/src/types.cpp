// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "gascraft/types.hpp"

#include <algorithm>

namespace gascraft {

std::string i128_to_string(i128 v) {
    if (v == 0) return "0";
    const bool neg = v < 0;
    u128 mag = neg ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v);
    std::string out;
    while (mag > 0) {
        out.push_back(static_cast<char>('0' + static_cast<int>(mag % 10)));
        mag /= 10;
    }
    if (neg) out.push_back('-');
    std::reverse(out.begin(), out.end());
    return out;
}

i128 i128_from_string(std::string_view s) {
    if (s.empty()) raise(ErrorCode::MalformedDocument, "empty integer literal");
    bool neg = false;
    std::size_t i = 0;
    if (s[0] == '-' || s[0] == '+') {
        neg = s[0] == '-';
        i = 1;
    }
    if (i == s.size()) raise(ErrorCode::MalformedDocument, "bare sign is not an integer");
    u128 mag = 0;
    constexpr u128 kMax = ~static_cast<u128>(0) >> 1; // 2^127 - 1
    for (; i < s.size(); ++i) {
        const char c = s[i];
        if (c < '0' || c > '9')
            raise(ErrorCode::MalformedDocument, "invalid integer literal: " + std::string(s));
        const int digit = c - '0';
        if (mag > (kMax - static_cast<u128>(digit)) / 10)
            raise(ErrorCode::MalformedDocument, "integer literal out of range: " + std::string(s));
        mag = mag * 10 + static_cast<u128>(digit);
    }
    return neg ? -static_cast<i128>(mag) : static_cast<i128>(mag);
}

std::string_view contract_type_name(ContractType t) {
    switch (t) {
        case ContractType::InterestRateSwap: return "InterestRateSwap";
        case ContractType::EquitySwap: return "EquitySwap";
        case ContractType::EquityOption: return "EquityOption";
        case ContractType::CommodityOption: return "CommodityOption";
        case ContractType::ForeignExchange: return "ForeignExchange";
    }
    raise(ErrorCode::UnknownContractType, "invalid enum value");
}

ContractType contract_type_from_name(std::string_view name) {
    for (int i = 0; i < kContractTypeCount; ++i) {
        const auto t = static_cast<ContractType>(i);
        if (contract_type_name(t) == name) return t;
    }
    raise(ErrorCode::UnknownContractType, std::string(name));
}

const std::vector<std::string>& currency_whitelist() {
    static const std::vector<std::string> kCurrencies{"USD", "EUR", "GBP", "JPY", "CHF"};
    return kCurrencies;
}

std::string_view error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::MalformedDocument: return "MalformedDocument";
        case ErrorCode::UnknownContractType: return "UnknownContractType";
        case ErrorCode::MissingRequiredPath: return "MissingRequiredPath";
        case ErrorCode::UnresolvablePath: return "UnresolvablePath";
        case ErrorCode::DuplicateVariant: return "DuplicateVariant";
        case ErrorCode::DanglingVariableReference: return "DanglingVariableReference";
        case ErrorCode::EmptyOptionSet: return "EmptyOptionSet";
        case ErrorCode::UnknownSymbol: return "UnknownSymbol";
        case ErrorCode::ValueTypeMismatch: return "ValueTypeMismatch";
        case ErrorCode::LiteralOverflow: return "LiteralOverflow";
        case ErrorCode::MissingSelection: return "MissingSelection";
        case ErrorCode::UnknownSettlementRule: return "UnknownSettlementRule";
        case ErrorCode::ToolchainUnavailable: return "ToolchainUnavailable";
        case ErrorCode::ToolchainTimeout: return "ToolchainTimeout";
        case ErrorCode::UnparsableOutput: return "UnparsableOutput";
        case ErrorCode::ActionOutOfRange: return "ActionOutOfRange";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::CorruptCheckpoint: return "CorruptCheckpoint";
        case ErrorCode::SpaceTooLarge: return "SpaceTooLarge";
        case ErrorCode::ScoreUndefined: return "ScoreUndefined";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

} // namespace gascraft
