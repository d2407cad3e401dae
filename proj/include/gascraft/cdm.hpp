// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gascraft/types.hpp"

namespace gascraft {

// Semantic kind of a canonical contract variable. Numeric kinds participate
// in feature extraction; party_address and currency_code do not.
enum class ValueKind {
    Amount,
    Price,
    Rate,
    Date,
    Quantity,
    PartyAddress,
    CurrencyCode,
};

std::string_view value_kind_name(ValueKind k);
ValueKind value_kind_from_name(std::string_view name);
bool value_kind_is_numeric(ValueKind k);

// A value bound to a canonical variable. Numeric kinds live in `num`
// (dates are unix seconds, rates are kRateScale fixed point); addresses and
// currency codes live in `text` (addresses as 0x-prefixed lowercase hex).
struct TypedValue {
    ValueKind kind = ValueKind::Amount;
    i128 num = 0;
    std::string text;

    bool operator==(const TypedValue&) const = default;
};

struct SchemaVariable {
    std::string path;          // dotted path into the instance field tree, [i] indexes arrays
    std::string name;          // canonical variable name, unique per schema
    ValueKind kind = ValueKind::Amount;
    i128 range_lo = 0;         // generation and normalization range (numeric kinds)
    i128 range_hi = 0;
    std::string not_before;    // optional: name of a date variable this one must not precede
};

struct MappingSchema {
    ContractType type = ContractType::InterestRateSwap;
    std::vector<SchemaVariable> variables;

    const SchemaVariable* find(std::string_view name) const;
};

// All five per-type schemas, loaded from a directory of JSON files.
struct SchemaSet {
    std::array<MappingSchema, kContractTypeCount> by_type;

    const MappingSchema& of(ContractType t) const { return by_type[static_cast<int>(t)]; }
};

struct CdmInstance {
    ContractType type = ContractType::InterestRateSwap;
    std::string id;
    nlohmann::json fields; // nested object tree mirroring the source document

    bool operator==(const CdmInstance&) const = default;
};

struct ConsistencyViolation {
    std::string code;   // DateOrderViolation | PartyCollision | NonPositiveAmount | UnknownCurrency
    std::string detail;
};

// Ordered canonical-name -> value map produced by apply_mapping.
struct VariableBindings {
    std::vector<std::pair<std::string, TypedValue>> ordered;

    const TypedValue* find(std::string_view name) const;
    const TypedValue& at(std::string_view name) const;
};

inline constexpr int kFeatureWidth = 10;
using FeatureVector = std::array<double, kFeatureWidth>;

MappingSchema parse_schema(const std::string& json_text);
MappingSchema load_schema_file(const std::string& path);
SchemaSet load_schema_dir(const std::string& dir);

// Parses one instance document, verifying the type tag and that every path
// required by the type's schema resolves.
CdmInstance parse_cdm(const std::string& json_text, const SchemaSet& schemas);
std::string serialize_cdm(const CdmInstance& instance);

std::vector<ConsistencyViolation> validate_consistency(const CdmInstance& instance,
                                                       const SchemaSet& schemas);

// Deterministic synthetic instances: output is a pure function of
// (seed, type, count). All generated instances pass validate_consistency.
std::vector<CdmInstance> generate_dataset(const SchemaSet& schemas, ContractType type,
                                          int count, std::uint64_t seed);

VariableBindings apply_mapping(const CdmInstance& instance, const SchemaSet& schemas);

// Numeric bindings normalized to [0,1] by schema range, in schema order,
// zero padded to kFeatureWidth entries.
FeatureVector extract_features(const VariableBindings& bindings, const MappingSchema& schema);

} // namespace gascraft
