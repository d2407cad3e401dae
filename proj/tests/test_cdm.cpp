// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <set>

#include "gascraft/cdm.hpp"
#include "test_util.hpp"

using namespace gascraft;

namespace {

const SchemaSet& schemas() {
    static const SchemaSet set = load_schema_dir(testing::schema_dir());
    return set;
}

CdmInstance sample_instance(ContractType type) {
    return generate_dataset(schemas(), type, 1, 7)[0];
}

} // namespace

TEST_CASE("i128 string round trip") {
    CHECK(i128_to_string(0) == "0");
    CHECK(i128_to_string(-1) == "-1");
    const i128 big = static_cast<i128>(1) << 100;
    CHECK(i128_from_string(i128_to_string(big)) == big);
    CHECK(i128_from_string("-98765432109876543210") ==
          -(static_cast<i128>(9876543210ll) * 10000000000ll + 9876543210ll));
    CHECK_THROWS_AS(i128_from_string("12x"), GascraftError);
}

TEST_CASE("schemas load with expected shapes") {
    const auto& irs = schemas().of(ContractType::InterestRateSwap);
    CHECK(irs.variables.size() == 10);
    CHECK(irs.find("notional")->kind == ValueKind::Amount);
    CHECK(irs.find("terminationDate")->not_before == "effectiveDate");

    int numeric = 0;
    for (const auto& v : irs.variables)
        if (value_kind_is_numeric(v.kind)) ++numeric;
    CHECK(numeric == 7);

    const auto& fx = schemas().of(ContractType::ForeignExchange);
    CHECK(fx.variables.size() == 8);
}

TEST_CASE("generation is deterministic in (seed, type, count)") {
    const auto a = generate_dataset(schemas(), ContractType::EquitySwap, 5, 42);
    const auto b = generate_dataset(schemas(), ContractType::EquitySwap, 5, 42);
    REQUIRE(a.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(a[i].id == b[i].id);
        CHECK(serialize_cdm(a[i]) == serialize_cdm(b[i]));
    }
    const auto c = generate_dataset(schemas(), ContractType::EquitySwap, 5, 43);
    CHECK(serialize_cdm(a[0]) != serialize_cdm(c[0]));
}

TEST_CASE("generated instances satisfy the consistency rules") {
    for (int t = 0; t < kContractTypeCount; ++t) {
        const auto type = static_cast<ContractType>(t);
        for (const auto& instance : generate_dataset(schemas(), type, 40, 202608)) {
            const auto violations = validate_consistency(instance, schemas());
            CHECK_MESSAGE(violations.empty(), instance.id);
        }
    }
}

TEST_CASE("generated ids are unique per dataset") {
    const auto batch = generate_dataset(schemas(), ContractType::CommodityOption, 50, 9);
    std::set<std::string> ids;
    for (const auto& instance : batch) ids.insert(instance.id);
    CHECK(ids.size() == batch.size());
}

TEST_CASE("parse and serialize round trip") {
    const auto original = sample_instance(ContractType::EquityOption);
    const std::string text = serialize_cdm(original);
    const CdmInstance parsed = parse_cdm(text, schemas());
    CHECK(parsed == original);
    CHECK(serialize_cdm(parsed) == text);
}

TEST_CASE("parse rejects malformed and incomplete documents") {
    CHECK_THROWS_AS(parse_cdm("{not json", schemas()), GascraftError);

    try {
        parse_cdm(R"({"contractType": "PowerSwap", "id": "x", "fields": {}})", schemas());
        FAIL("expected UnknownContractType");
    } catch (const GascraftError& e) {
        CHECK(e.code() == ErrorCode::UnknownContractType);
    }

    try {
        parse_cdm(R"({"contractType": "EquitySwap", "id": "x", "fields": {"trade": {}}})",
                  schemas());
        FAIL("expected MissingRequiredPath");
    } catch (const GascraftError& e) {
        CHECK(e.code() == ErrorCode::MissingRequiredPath);
        CHECK(std::string(e.what()).find("tradeDate") != std::string::npos);
    }
}

TEST_CASE("validate_consistency reports violations as data") {
    auto instance = sample_instance(ContractType::EquitySwap);

    SUBCASE("date order") {
        instance.fields["trade"]["product"]["performancePayout"]["terminationDate"] = 1000;
        const auto violations = validate_consistency(instance, schemas());
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].code == "DateOrderViolation");
    }
    SUBCASE("party collision") {
        const auto payer =
            instance.fields["trade"]["parties"]["payer"]["address"].get<std::string>();
        instance.fields["trade"]["parties"]["receiver"]["address"] = payer;
        const auto violations = validate_consistency(instance, schemas());
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].code == "PartyCollision");
    }
    SUBCASE("non positive amount") {
        instance.fields["trade"]["product"]["fixedPayout"]["notional"]["amount"] = 0;
        const auto violations = validate_consistency(instance, schemas());
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].code == "NonPositiveAmount");
    }
    SUBCASE("unknown currency") {
        instance.fields["trade"]["product"]["fixedPayout"]["notional"]["currency"] = "XAU";
        const auto violations = validate_consistency(instance, schemas());
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].code == "UnknownCurrency");
    }
}

TEST_CASE("apply_mapping resolves array indexed paths") {
    const auto instance = sample_instance(ContractType::EquityOption);
    const auto bindings = apply_mapping(instance, schemas());
    const TypedValue& buyer = bindings.at("buyer");
    CHECK(buyer.kind == ValueKind::PartyAddress);
    CHECK(buyer.text.substr(0, 2) == "0x");
    CHECK(buyer.text.size() == 42);
    CHECK(bindings.at("strikePrice").num >= 10000);
}

TEST_CASE("apply_mapping fails closed on unresolvable paths") {
    auto instance = sample_instance(ContractType::ForeignExchange);
    instance.fields["trade"]["product"]["fxPayout"].erase("exchangeRate");
    try {
        apply_mapping(instance, schemas());
        FAIL("expected UnresolvablePath");
    } catch (const GascraftError& e) {
        CHECK(e.code() == ErrorCode::UnresolvablePath);
    }
}

TEST_CASE("extract_features normalizes by schema range and pads to ten") {
    const auto& schema = schemas().of(ContractType::InterestRateSwap);
    const auto instance = sample_instance(ContractType::InterestRateSwap);
    const auto bindings = apply_mapping(instance, schemas());
    const FeatureVector f = extract_features(bindings, schema);

    for (double v : f) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    // Seven numeric variables: the trailing three entries stay zero padded.
    CHECK(f[7] == 0.0);
    CHECK(f[8] == 0.0);
    CHECK(f[9] == 0.0);

    // Hand check one entry: notional is the fourth numeric in schema order.
    const auto* var = schema.find("notional");
    const double expected = (static_cast<double>(bindings.at("notional").num) -
                             static_cast<double>(var->range_lo)) /
                            (static_cast<double>(var->range_hi) -
                             static_cast<double>(var->range_lo));
    CHECK(f[3] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("feature clamp is exercised by out of range values") {
    const auto& schema = schemas().of(ContractType::EquitySwap);
    auto instance = sample_instance(ContractType::EquitySwap);
    instance.fields["trade"]["product"]["fixedPayout"]["notional"]["amount"] = 2000000000000ll;
    const auto bindings = apply_mapping(instance, schemas());
    const FeatureVector f = extract_features(bindings, schema);
    CHECK(f[2] == 1.0);
}
