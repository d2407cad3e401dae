// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "gascraft/cdm.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "gascraft/rng.hpp"

namespace gascraft {
namespace {

using nlohmann::json;

struct PathSegment {
    std::string key;
    std::vector<std::size_t> indices;
};

std::vector<PathSegment> split_path(const std::string& path) {
    std::vector<PathSegment> segments;
    std::size_t i = 0;
    while (i < path.size()) {
        PathSegment seg;
        while (i < path.size() && path[i] != '.' && path[i] != '[') seg.key.push_back(path[i++]);
        while (i < path.size() && path[i] == '[') {
            const std::size_t close = path.find(']', i);
            if (close == std::string::npos)
                raise(ErrorCode::MalformedDocument, "unterminated index in path: " + path);
            seg.indices.push_back(std::stoull(path.substr(i + 1, close - i - 1)));
            i = close + 1;
        }
        if (seg.key.empty())
            raise(ErrorCode::MalformedDocument, "empty segment in path: " + path);
        segments.push_back(std::move(seg));
        if (i < path.size()) {
            if (path[i] != '.')
                raise(ErrorCode::MalformedDocument, "malformed path: " + path);
            ++i;
        }
    }
    return segments;
}

const json* resolve_path(const json& root, const std::string& path) {
    const json* node = &root;
    for (const auto& seg : split_path(path)) {
        if (!node->is_object()) return nullptr;
        const auto it = node->find(seg.key);
        if (it == node->end()) return nullptr;
        node = &*it;
        for (const std::size_t idx : seg.indices) {
            if (!node->is_array() || idx >= node->size()) return nullptr;
            node = &(*node)[idx];
        }
    }
    return node;
}

void set_path(json& root, const std::string& path, json value) {
    json* node = &root;
    const auto segments = split_path(path);
    for (std::size_t s = 0; s < segments.size(); ++s) {
        const auto& seg = segments[s];
        const bool last = s + 1 == segments.size();
        json* next = &(*node)[seg.key];
        for (const std::size_t idx : seg.indices) {
            if (!next->is_array()) *next = json::array();
            while (next->size() <= idx) next->push_back(json::object());
            next = &(*next)[idx];
        }
        if (last) {
            *next = std::move(value);
        } else {
            if (!next->is_object()) *next = json::object();
            node = next;
        }
    }
}

bool is_hex_address(const std::string& s) {
    if (s.size() != 42 || s[0] != '0' || s[1] != 'x') return false;
    return std::all_of(s.begin() + 2, s.end(), [](unsigned char c) { return std::isxdigit(c); });
}

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

i128 json_to_int(const json& node, const std::string& where) {
    if (node.is_number_integer())
        return static_cast<i128>(node.get<std::int64_t>());
    if (node.is_number_unsigned())
        return static_cast<i128>(node.get<std::uint64_t>());
    raise(ErrorCode::ValueTypeMismatch, "expected integer at " + where);
}

const char* schema_file_name(ContractType t) {
    switch (t) {
        case ContractType::InterestRateSwap: return "interest_rate_swap.json";
        case ContractType::EquitySwap: return "equity_swap.json";
        case ContractType::EquityOption: return "equity_option.json";
        case ContractType::CommodityOption: return "commodity_option.json";
        case ContractType::ForeignExchange: return "foreign_exchange.json";
    }
    raise(ErrorCode::UnknownContractType, "invalid enum value");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

} // namespace

std::string_view value_kind_name(ValueKind k) {
    switch (k) {
        case ValueKind::Amount: return "amount";
        case ValueKind::Price: return "price";
        case ValueKind::Rate: return "rate";
        case ValueKind::Date: return "date";
        case ValueKind::Quantity: return "quantity";
        case ValueKind::PartyAddress: return "party_address";
        case ValueKind::CurrencyCode: return "currency_code";
    }
    return "unknown";
}

ValueKind value_kind_from_name(std::string_view name) {
    for (int i = 0; i <= static_cast<int>(ValueKind::CurrencyCode); ++i) {
        const auto k = static_cast<ValueKind>(i);
        if (value_kind_name(k) == name) return k;
    }
    raise(ErrorCode::MalformedDocument, "unknown value kind: " + std::string(name));
}

bool value_kind_is_numeric(ValueKind k) {
    return k != ValueKind::PartyAddress && k != ValueKind::CurrencyCode;
}

const SchemaVariable* MappingSchema::find(std::string_view name) const {
    for (const auto& v : variables)
        if (v.name == name) return &v;
    return nullptr;
}

const TypedValue* VariableBindings::find(std::string_view name) const {
    for (const auto& [n, v] : ordered)
        if (n == name) return &v;
    return nullptr;
}

const TypedValue& VariableBindings::at(std::string_view name) const {
    const TypedValue* v = find(name);
    if (!v) raise(ErrorCode::UnknownSymbol, "no binding for " + std::string(name));
    return *v;
}

MappingSchema parse_schema(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        raise(ErrorCode::MalformedDocument, std::string("schema parse: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("contractType") || !doc.contains("variables"))
        raise(ErrorCode::MalformedDocument, "schema must declare contractType and variables");

    MappingSchema schema;
    schema.type = contract_type_from_name(doc["contractType"].get<std::string>());

    std::set<std::string> names;
    int numeric = 0;
    for (const auto& entry : doc["variables"]) {
        SchemaVariable var;
        var.path = entry.at("path").get<std::string>();
        var.name = entry.at("name").get<std::string>();
        var.kind = value_kind_from_name(entry.at("kind").get<std::string>());
        if (value_kind_is_numeric(var.kind)) {
            const auto& range = entry.at("range");
            var.range_lo = json_to_int(range.at(0), var.name + ".range[0]");
            var.range_hi = json_to_int(range.at(1), var.name + ".range[1]");
            if (var.range_lo > var.range_hi)
                raise(ErrorCode::MalformedDocument, "inverted range for " + var.name);
            ++numeric;
        }
        if (entry.contains("not_before")) {
            var.not_before = entry["not_before"].get<std::string>();
            if (var.kind != ValueKind::Date)
                raise(ErrorCode::MalformedDocument, "not_before only applies to dates: " + var.name);
            const SchemaVariable* ref = schema.find(var.not_before);
            if (!ref || ref->kind != ValueKind::Date)
                raise(ErrorCode::MalformedDocument,
                      "not_before must reference an earlier date variable: " + var.name);
        }
        if (!names.insert(var.name).second)
            raise(ErrorCode::MalformedDocument, "duplicate variable name: " + var.name);
        schema.variables.push_back(std::move(var));
    }
    if (numeric > kFeatureWidth)
        raise(ErrorCode::MalformedDocument, "schema exceeds the feature budget of 10 numerics");
    return schema;
}

MappingSchema load_schema_file(const std::string& path) {
    return parse_schema(read_file(path));
}

SchemaSet load_schema_dir(const std::string& dir) {
    SchemaSet set;
    for (int i = 0; i < kContractTypeCount; ++i) {
        const auto t = static_cast<ContractType>(i);
        const auto path = std::filesystem::path(dir) / schema_file_name(t);
        MappingSchema schema = load_schema_file(path.string());
        if (schema.type != t)
            raise(ErrorCode::MalformedDocument,
                  "schema type mismatch in " + path.string());
        set.by_type[i] = std::move(schema);
    }
    return set;
}

CdmInstance parse_cdm(const std::string& json_text, const SchemaSet& schemas) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        raise(ErrorCode::MalformedDocument, std::string("instance parse: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("contractType") || !doc.contains("fields") ||
        !doc.contains("id"))
        raise(ErrorCode::MalformedDocument, "instance must carry contractType, id and fields");
    if (!doc["id"].is_string() || doc["id"].get<std::string>().empty())
        raise(ErrorCode::MalformedDocument, "instance id must be a non-empty string");
    if (!doc["fields"].is_object())
        raise(ErrorCode::MalformedDocument, "fields must be an object");

    CdmInstance instance;
    instance.type = contract_type_from_name(doc["contractType"].get<std::string>());
    instance.id = doc["id"].get<std::string>();
    instance.fields = doc["fields"];

    std::vector<std::string> missing;
    for (const auto& var : schemas.of(instance.type).variables)
        if (!resolve_path(instance.fields, var.path)) missing.push_back(var.path);
    if (!missing.empty()) {
        std::string joined;
        for (const auto& p : missing) joined += (joined.empty() ? "" : ", ") + p;
        raise(ErrorCode::MissingRequiredPath, joined);
    }
    return instance;
}

std::string serialize_cdm(const CdmInstance& instance) {
    json doc;
    doc["contractType"] = std::string(contract_type_name(instance.type));
    doc["id"] = instance.id;
    doc["fields"] = instance.fields;
    return doc.dump(2) + "\n";
}

VariableBindings apply_mapping(const CdmInstance& instance, const SchemaSet& schemas) {
    VariableBindings bindings;
    for (const auto& var : schemas.of(instance.type).variables) {
        const json* node = resolve_path(instance.fields, var.path);
        if (!node) raise(ErrorCode::UnresolvablePath, var.path);
        TypedValue value;
        value.kind = var.kind;
        switch (var.kind) {
            case ValueKind::PartyAddress: {
                if (!node->is_string())
                    raise(ErrorCode::ValueTypeMismatch, "address expected at " + var.path);
                std::string addr = to_lower(node->get<std::string>());
                if (!is_hex_address(addr))
                    raise(ErrorCode::ValueTypeMismatch, "malformed address at " + var.path);
                value.text = std::move(addr);
                break;
            }
            case ValueKind::CurrencyCode: {
                if (!node->is_string() || node->get<std::string>().empty())
                    raise(ErrorCode::ValueTypeMismatch, "currency code expected at " + var.path);
                value.text = node->get<std::string>();
                break;
            }
            default:
                value.num = json_to_int(*node, var.path);
        }
        bindings.ordered.emplace_back(var.name, std::move(value));
    }
    return bindings;
}

std::vector<ConsistencyViolation> validate_consistency(const CdmInstance& instance,
                                                       const SchemaSet& schemas) {
    const MappingSchema& schema = schemas.of(instance.type);
    const VariableBindings bindings = apply_mapping(instance, schemas);
    std::vector<ConsistencyViolation> violations;

    for (const auto& var : schema.variables) {
        const TypedValue& value = bindings.at(var.name);
        if (var.kind == ValueKind::Date && !var.not_before.empty()) {
            if (value.num < bindings.at(var.not_before).num)
                violations.push_back({"DateOrderViolation",
                                      var.name + " precedes " + var.not_before});
        }
        if (var.kind == ValueKind::Amount && value.num <= 0)
            violations.push_back({"NonPositiveAmount", var.name + " must be positive"});
        if (var.kind == ValueKind::CurrencyCode) {
            const auto& whitelist = currency_whitelist();
            if (std::find(whitelist.begin(), whitelist.end(), value.text) == whitelist.end())
                violations.push_back({"UnknownCurrency", var.name + " = " + value.text});
        }
    }

    std::vector<std::pair<std::string, std::string>> addresses;
    for (const auto& var : schema.variables)
        if (var.kind == ValueKind::PartyAddress)
            addresses.emplace_back(var.name, bindings.at(var.name).text);
    for (std::size_t i = 0; i < addresses.size(); ++i)
        for (std::size_t j = i + 1; j < addresses.size(); ++j)
            if (addresses[i].second == addresses[j].second)
                violations.push_back({"PartyCollision",
                                      addresses[i].first + " equals " + addresses[j].first});
    return violations;
}

std::vector<CdmInstance> generate_dataset(const SchemaSet& schemas, ContractType type,
                                          int count, std::uint64_t seed) {
    const MappingSchema& schema = schemas.of(type);
    std::mt19937_64 rng(derive_seed(seed, contract_type_name(type)));
    std::vector<CdmInstance> out;
    out.reserve(static_cast<std::size_t>(count));

    for (int index = 0; index < count; ++index) {
        CdmInstance instance;
        instance.type = type;
        char id[96];
        std::snprintf(id, sizeof id, "%s-%llu-%05d", std::string(contract_type_name(type)).c_str(),
                      static_cast<unsigned long long>(seed), index);
        instance.id = id;
        instance.fields = json::object();

        std::vector<std::pair<std::string, i128>> dates;
        std::set<std::string> used_addresses;
        std::set<std::string> used_currencies;

        for (const auto& var : schema.variables) {
            switch (var.kind) {
                case ValueKind::PartyAddress: {
                    std::string addr;
                    do {
                        char buf[43] = "0x";
                        static const char* hex = "0123456789abcdef";
                        for (int b = 0; b < 20; ++b) {
                            const auto byte = static_cast<unsigned>(rng_int(rng, 0, 255));
                            buf[2 + 2 * b] = hex[byte >> 4];
                            buf[3 + 2 * b] = hex[byte & 0xf];
                        }
                        buf[42] = '\0';
                        addr = buf;
                    } while (!used_addresses.insert(addr).second);
                    set_path(instance.fields, var.path, addr);
                    break;
                }
                case ValueKind::CurrencyCode: {
                    const auto& whitelist = currency_whitelist();
                    std::string code;
                    do {
                        code = whitelist[static_cast<std::size_t>(
                            rng_int(rng, 0, static_cast<std::int64_t>(whitelist.size()) - 1))];
                    } while (!used_currencies.insert(code).second);
                    set_path(instance.fields, var.path, code);
                    break;
                }
                default: {
                    std::int64_t lo = static_cast<std::int64_t>(var.range_lo);
                    const std::int64_t hi = static_cast<std::int64_t>(var.range_hi);
                    if (var.kind == ValueKind::Date && !var.not_before.empty()) {
                        for (const auto& [name, value] : dates)
                            if (name == var.not_before)
                                lo = std::max(lo, static_cast<std::int64_t>(value));
                    }
                    const std::int64_t value = rng_int(rng, lo, hi);
                    if (var.kind == ValueKind::Date) dates.emplace_back(var.name, value);
                    set_path(instance.fields, var.path, value);
                }
            }
        }
        out.push_back(std::move(instance));
    }
    return out;
}

FeatureVector extract_features(const VariableBindings& bindings, const MappingSchema& schema) {
    FeatureVector features{};
    int slot = 0;
    for (const auto& var : schema.variables) {
        if (!value_kind_is_numeric(var.kind)) continue;
        if (slot >= kFeatureWidth) break;
        const double lo = static_cast<double>(var.range_lo);
        const double hi = static_cast<double>(var.range_hi);
        const double v = static_cast<double>(bindings.at(var.name).num);
        double unit = hi > lo ? (v - lo) / (hi - lo) : 0.0;
        unit = std::clamp(unit, 0.0, 1.0);
        features[static_cast<std::size_t>(slot++)] = unit;
    }
    return features;
}

} // namespace gascraft
