// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gascraft/types.hpp"

namespace gascraft {

// Solidity types admitted by the fragment grammar. Widths are the storage
// widths used for slot packing and for overflow checks during simulation.
enum class SolType {
    U32,
    U64,
    U128,
    U256,
    I64,
    I256,
    Address,
    String,
};

std::string_view sol_type_name(SolType t);
std::optional<SolType> sol_type_from_name(std::string_view name);
int sol_type_width(SolType t);      // bits; Address is 160, String occupies a full slot
bool sol_type_is_numeric(SolType t);
bool sol_type_is_signed(SolType t);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
    enum class Kind {
        Number,      // decimal literal
        Identifier,  // state variable or local
        Binary,      // + - * / %
        Compare,     // < > <= >= == !=
        Ternary,     // cond ? a : b
        Cast,        // type(expr)
    };

    Kind kind = Kind::Number;
    i128 number = 0;
    std::string name;       // Identifier
    std::string op;         // Binary / Compare
    SolType cast_type = SolType::U256;
    ExprPtr a, b, c;        // operands; Ternary uses all three (cond, then, else)
};

struct Stmt {
    enum class Kind {
        LocalDecl,   // type name [= expr];
        Assign,      // name = expr;
        BalanceOp,   // balances[party] += expr; / -= expr;
        If,          // if (cond) { ... } [else { ... }]
    };

    Kind kind = Kind::LocalDecl;
    SolType decl_type = SolType::U256;
    std::string name;            // LocalDecl / Assign target; BalanceOp index identifier
    bool balance_add = true;     // BalanceOp: += when true, -= when false
    ExprPtr value;               // LocalDecl init (optional), Assign rhs, BalanceOp delta
    ExprPtr cond;                // If
    std::vector<Stmt> then_body;
    std::vector<Stmt> else_body;
};

// A variable declaration fragment: `uint64 public tradeDate = 123;`.
// The initializer is absent for constructor-bound variables; a placeholder
// initializer (template form) keeps the slot name for later substitution.
struct VarDeclFragment {
    SolType type = SolType::U256;
    bool is_public = true;
    std::string name;
    bool has_init = false;
    bool init_is_placeholder = false;
    std::string placeholder;         // canonical name inside <NAME_VALUE>
    i128 init_number = 0;
    std::string init_text;           // address hex or string literal payload
    bool init_is_text = false;
};

struct FunctionFragment {
    std::string name;
    std::vector<Stmt> body;
};

// Parse entry points. `allow_placeholders` admits <name_VALUE> slots in
// expression and initializer position (used when validating raw templates);
// rendered fragments are parsed strictly. Failures come back as data so the
// static checker can fold them into its MalformedFragment error class.
struct ParseResult {
    bool ok = false;
    std::string message;
};

ParseResult parse_var_decl(const std::string& text, bool allow_placeholders,
                           VarDeclFragment& out);
ParseResult parse_function(const std::string& text, bool allow_placeholders,
                           FunctionFragment& out);

// Collects every identifier appearing in expression position inside a
// function body (state variables and locals alike, excluding `balances`).
void collect_identifiers(const FunctionFragment& fn, std::vector<std::string>& out);

} // namespace gascraft
