// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "gascraft/evaluate.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "gascraft/rng.hpp"

namespace gascraft {

namespace {

int fit_width(i128 v) {
    if (v < 0) v = -v;
    if (v < (i128(1) << 32)) return 32;
    if (v < (i128(1) << 64)) return 64;
    return 128;
}

struct TypeInfo {
    int width = 256;
    bool sig = false;
    bool literal = false;
    bool boolean = false;
};

class StaticChecker {
  public:
    StaticChecker(const AssembledContract& contract, std::vector<StaticError>& errors)
        : contract_(contract), errors_(errors) {
        for (const StateVariable& var : contract.variables) state_[var.name] = var.type;
    }

    void check_function(const AssembledFunction& fn) {
        fragment_ = fn.name;
        if (!fn.parse_ok) {
            report(ErrorClass::MalformedFragment, fn.parse_message);
            return;
        }
        scopes_.clear();
        declared_.clear();
        scopes_.emplace_back();
        check_block(fn.fragment.body);
        scopes_.clear();
    }

  private:
    void report(ErrorClass cls, const std::string& detail) {
        errors_.push_back({cls, fragment_, detail});
    }

    const SolType* lookup_local(const std::string& name) const {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            const auto found = it->find(name);
            if (found != it->end()) return &found->second;
        }
        return nullptr;
    }

    bool local_declared_anywhere(const std::string& name) const {
        return lookup_local(name) != nullptr || declared_.count(name) > 0;
    }

    TypeInfo of_type(SolType t) const {
        TypeInfo info;
        info.width = sol_type_width(t);
        info.sig = sol_type_is_signed(t);
        return info;
    }

    TypeInfo check_expr(const Expr& e) {
        switch (e.kind) {
        case Expr::Kind::Number: {
            TypeInfo info;
            info.width = fit_width(e.number);
            info.literal = true;
            return info;
        }
        case Expr::Kind::Identifier: {
            if (const SolType* local = lookup_local(e.name)) return of_type(*local);
            const auto found = state_.find(e.name);
            if (found == state_.end()) {
                report(ErrorClass::UndeclaredIdentifier, e.name);
                return {};
            }
            if (!sol_type_is_numeric(found->second) && found->second != SolType::Address)
                report(ErrorClass::TypeMismatch, e.name + " is not usable in an expression");
            return of_type(found->second);
        }
        case Expr::Kind::Binary:
        case Expr::Kind::Compare: {
            const TypeInfo a = check_expr(*e.a);
            const TypeInfo b = check_expr(*e.b);
            if (a.boolean || b.boolean)
                report(ErrorClass::TypeMismatch, "boolean operand of " + e.op);
            if (!a.literal && !b.literal && a.sig != b.sig)
                report(ErrorClass::TypeMismatch,
                       "signed and unsigned operands of " + e.op);
            TypeInfo out;
            out.width = std::max(a.width, b.width);
            out.sig = a.literal ? b.sig : (b.literal ? a.sig : a.sig);
            out.literal = a.literal && b.literal;
            out.boolean = e.kind == Expr::Kind::Compare;
            if (out.boolean) {
                out.width = 0;
                out.sig = false;
                out.literal = false;
            }
            return out;
        }
        case Expr::Kind::Ternary: {
            const TypeInfo cond = check_expr(*e.a);
            if (!cond.boolean)
                report(ErrorClass::TypeMismatch, "ternary condition is not boolean");
            const TypeInfo then_info = check_expr(*e.b);
            const TypeInfo else_info = check_expr(*e.c);
            if (!then_info.literal && !else_info.literal && then_info.sig != else_info.sig)
                report(ErrorClass::TypeMismatch, "signed and unsigned ternary arms");
            TypeInfo out;
            out.width = std::max(then_info.width, else_info.width);
            out.sig = then_info.literal ? else_info.sig : then_info.sig;
            out.literal = then_info.literal && else_info.literal;
            return out;
        }
        case Expr::Kind::Cast: {
            (void)check_expr(*e.a);
            return of_type(e.cast_type);
        }
        }
        return {};
    }

    void check_store(const TypeInfo& target, const TypeInfo& value, const std::string& name) {
        if (value.boolean) {
            report(ErrorClass::TypeMismatch, "boolean assigned to " + name);
            return;
        }
        if (!value.literal && value.sig != target.sig)
            report(ErrorClass::TypeMismatch,
                   (value.sig ? std::string("signed") : std::string("unsigned")) +
                   " expression assigned to " + name + " without a cast");
        if (value.width > target.width)
            report(ErrorClass::WidthConflict,
                   name + " is " + std::to_string(target.width) +
                   " bits but the expression is " + std::to_string(value.width));
    }

    void check_block(const std::vector<Stmt>& body) {
        for (const Stmt& stmt : body) check_stmt(stmt);
    }

    void check_stmt(const Stmt& stmt) {
        switch (stmt.kind) {
        case Stmt::Kind::LocalDecl: {
            TypeInfo value;
            bool has_value = false;
            if (stmt.value) {
                value = check_expr(*stmt.value);
                has_value = true;
            }
            if (local_declared_anywhere(stmt.name)) {
                report(ErrorClass::DuplicateDeclaration, stmt.name);
            } else {
                scopes_.back()[stmt.name] = stmt.decl_type;
                declared_.insert(stmt.name);
            }
            if (has_value) check_store(of_type(stmt.decl_type), value, stmt.name);
            break;
        }
        case Stmt::Kind::Assign: {
            const TypeInfo value = check_expr(*stmt.value);
            const SolType* local = lookup_local(stmt.name);
            const SolType* target = local;
            if (target == nullptr) {
                const auto found = state_.find(stmt.name);
                if (found != state_.end()) target = &found->second;
            }
            if (target == nullptr) {
                report(ErrorClass::UndeclaredIdentifier, stmt.name);
                break;
            }
            check_store(of_type(*target), value, stmt.name);
            break;
        }
        case Stmt::Kind::BalanceOp: {
            const SolType* local = lookup_local(stmt.name);
            const SolType* index = local;
            if (index == nullptr) {
                const auto found = state_.find(stmt.name);
                if (found != state_.end()) index = &found->second;
            }
            if (index == nullptr) {
                report(ErrorClass::UndeclaredIdentifier, stmt.name);
            } else if (*index != SolType::Address) {
                report(ErrorClass::TypeMismatch, "balances indexed by non-address " + stmt.name);
            }
            const TypeInfo value = check_expr(*stmt.value);
            if (value.boolean)
                report(ErrorClass::TypeMismatch, "boolean balance delta");
            else if (!value.sig && !value.literal)
                report(ErrorClass::TypeMismatch,
                       "unsigned balance delta without an int256 cast");
            break;
        }
        case Stmt::Kind::If: {
            const TypeInfo cond = check_expr(*stmt.cond);
            if (!cond.boolean)
                report(ErrorClass::TypeMismatch, "if condition is not boolean");
            scopes_.emplace_back();
            check_block(stmt.then_body);
            scopes_.pop_back();
            scopes_.emplace_back();
            check_block(stmt.else_body);
            scopes_.pop_back();
            break;
        }
        }
    }

    const AssembledContract& contract_;
    std::vector<StaticError>& errors_;
    std::string fragment_;
    std::map<std::string, SolType> state_;
    std::vector<std::map<std::string, SolType>> scopes_;
    std::set<std::string> declared_; // function-lifetime names, for duplicate detection
};

} // namespace

std::string_view error_class_name(ErrorClass c) {
    switch (c) {
    case ErrorClass::TypeMismatch: return "TypeMismatch";
    case ErrorClass::UndeclaredIdentifier: return "UndeclaredIdentifier";
    case ErrorClass::WidthConflict: return "WidthConflict";
    case ErrorClass::DuplicateDeclaration: return "DuplicateDeclaration";
    case ErrorClass::MalformedFragment: return "MalformedFragment";
    }
    return "?";
}

std::vector<StaticError> static_check(const AssembledContract& contract) {
    std::vector<StaticError> errors;
    StaticChecker checker(contract, errors);
    for (const AssembledFunction& fn : contract.functions) checker.check_function(fn);
    return errors;
}

int distinct_error_count(const std::vector<StaticError>& errors) {
    std::set<std::pair<int, std::string>> seen;
    for (const StaticError& e : errors) seen.insert({static_cast<int>(e.cls), e.symbol});
    return static_cast<int>(seen.size());
}

long long GasModel::unit(const std::string& op_class) const {
    if (op_class == "storage_write_init") return storage_write_init;
    if (op_class == "storage_write_update") return storage_write_update;
    if (op_class == "storage_read") return storage_read;
    if (op_class == "memory_op") return memory_op;
    if (op_class == "arith_op") return arith_op;
    if (op_class == "compare_op") return compare_op;
    if (op_class == "branch_op") return branch_op;
    raise(ErrorCode::ConfigError, "unknown op class " + op_class);
}

std::uint64_t GasModel::hash() const {
    std::ostringstream out;
    out << version << '|' << storage_write_init << '|' << storage_write_update << '|'
        << storage_read << '|' << memory_op << '|' << arith_op << '|' << compare_op << '|'
        << branch_op << '|' << base_deploy << '|' << per_storage_slot << '|'
        << per_code_byte << '|' << per_constructor_param;
    return fnv1a(out.str());
}

namespace {

i128 scaled_product(i128 amount, i128 rate) { return amount * rate / kRateScale; }

} // namespace

BalanceDeltas oracle_expected_state(const std::string& rule_id,
                                    const VariableBindings& values) {
    const auto num = [&](const char* name) { return values.at(name).num; };
    const auto addr = [&](const char* name) { return values.at(name).text; };

    BalanceDeltas deltas;
    const auto transfer = [&](const std::string& from, const std::string& to, i128 amount) {
        deltas[from] -= amount;
        deltas[to] += amount;
    };

    if (rule_id == "irs-fixed-coupon") {
        transfer(addr("payerParty"), addr("receiverParty"),
                 scaled_product(num("notional"), num("fixedRate")));
    } else if (rule_id == "irs-floating-coupon") {
        transfer(addr("receiverParty"), addr("payerParty"),
                 scaled_product(num("notional"),
                                num("floatingRate") + num("floatingSpread")));
    } else if (rule_id == "irs-net") {
        const i128 fixed = scaled_product(num("notional"), num("fixedRate"));
        const i128 floating = scaled_product(
            num("notional"), num("floatingRate") + num("floatingSpread"));
        if (fixed > floating)
            transfer(addr("payerParty"), addr("receiverParty"), fixed - floating);
        else if (floating > fixed)
            transfer(addr("receiverParty"), addr("payerParty"), floating - fixed);
    } else if (rule_id == "equity-fixed-leg") {
        transfer(addr("payerParty"), addr("receiverParty"),
                 scaled_product(num("fixedNotional"), num("fixedDividend")));
    } else if (rule_id == "equity-float-leg") {
        const i128 start = num("startPrice");
        const i128 end = num("endPrice");
        const i128 amount = num("quantity") * (end > start ? end - start : start - end);
        if (end > start)
            transfer(addr("payerParty"), addr("receiverParty"), amount);
        else if (start > end)
            transfer(addr("receiverParty"), addr("payerParty"), amount);
    } else if (rule_id == "option-premium") {
        transfer(addr("buyer"), addr("seller"), num("premium"));
    } else if (rule_id == "option-payoff") {
        const i128 strike = num("strikePrice");
        const i128 spot = num("spotPrice");
        if (spot > strike)
            transfer(addr("seller"), addr("buyer"), (spot - strike) * num("quantity"));
    } else if (rule_id == "fx-deliver-base") {
        transfer(addr("seller"), addr("buyer"), num("baseAmount"));
    } else if (rule_id == "fx-quote-leg") {
        transfer(addr("buyer"), addr("seller"),
                 scaled_product(num("baseAmount"), num("contractRate")));
    } else {
        raise(ErrorCode::UnknownSettlementRule, rule_id);
    }
    return deltas;
}

bool deltas_equal(const BalanceDeltas& a, const BalanceDeltas& b) {
    std::set<std::string> keys;
    for (const auto& [k, v] : a) keys.insert(k);
    for (const auto& [k, v] : b) keys.insert(k);
    for (const std::string& k : keys) {
        const auto ia = a.find(k);
        const auto ib = b.find(k);
        const i128 va = ia == a.end() ? 0 : ia->second;
        const i128 vb = ib == b.end() ? 0 : ib->second;
        if (va != vb) return false;
    }
    return true;
}

namespace {

struct EvalValue {
    i128 num = 0;
    std::string addr; // set for address-typed values
    bool is_address = false;
    int width = 256;
    bool sig = false;
    bool literal = false;
    bool boolean = false;
};

struct RevertSignal {
    bool overflow = false;
    std::string reason;
};

class Simulator {
  public:
    Simulator(const AssembledContract& contract, const GasModel& model, FunctionReport& report)
        : model_(model), report_(report) {
        for (const StateVariable& var : contract.variables)
            state_[var.name] = {var.value, var.type};
    }

    void run(const AssembledFunction& fn) {
        scopes_.clear();
        scopes_.emplace_back();
        try {
            exec_block(fn.fragment.body);
            report_.actual = deltas_;
        } catch (const RevertSignal& signal) {
            report_.reverted = true;
            report_.overflowed = signal.overflow;
            report_.revert_reason = signal.reason;
            report_.actual.clear();
        }
        report_.gas += gas_;
    }

  private:
    [[noreturn]] void revert(bool overflow, const std::string& reason) {
        throw RevertSignal{overflow, reason};
    }

    void range_check(i128 v, int width, bool sig, const std::string& what) {
        if (width >= 128) return; // bound values keep wide ops far below 2^127
        if (sig) {
            const i128 bound = i128(1) << (width - 1);
            if (v < -bound || v >= bound)
                revert(true, what + " out of int" + std::to_string(width) + " range");
        } else {
            if (v < 0 || v >= (i128(1) << width))
                revert(true, what + " out of uint" + std::to_string(width) + " range");
        }
    }

    EvalValue* find_local(const std::string& name) {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            const auto found = it->find(name);
            if (found != it->end()) return &found->second;
        }
        return nullptr;
    }

    EvalValue eval(const Expr& e) {
        switch (e.kind) {
        case Expr::Kind::Number: {
            EvalValue out;
            out.num = e.number;
            out.width = fit_width(e.number);
            out.literal = true;
            return out;
        }
        case Expr::Kind::Identifier: {
            if (const EvalValue* local = find_local(e.name)) {
                gas_ += model_.memory_op;
                return *local;
            }
            const auto found = state_.find(e.name);
            if (found == state_.end()) revert(false, "unknown identifier " + e.name);
            gas_ += model_.storage_read;
            const auto& [value, type] = found->second;
            EvalValue out;
            out.width = sol_type_width(type);
            out.sig = sol_type_is_signed(type);
            if (type == SolType::Address) {
                out.is_address = true;
                out.addr = value.text;
            } else if (type == SolType::String) {
                revert(false, "string operand " + e.name);
            } else {
                out.num = value.num;
            }
            return out;
        }
        case Expr::Kind::Binary: {
            const EvalValue a = eval(*e.a);
            const EvalValue b = eval(*e.b);
            gas_ += model_.arith_op;
            const int width = std::max(a.width, b.width);
            const bool sig = a.literal ? b.sig : a.sig;
            i128 v = 0;
            if (e.op == "+") v = a.num + b.num;
            else if (e.op == "-") v = a.num - b.num;
            else if (e.op == "*") v = a.num * b.num;
            else if (e.op == "/" || e.op == "%") {
                if (b.num == 0) revert(false, "division by zero");
                v = e.op == "/" ? a.num / b.num : a.num % b.num;
            }
            range_check(v, width, sig, e.op);
            EvalValue out;
            out.num = v;
            out.width = width;
            out.sig = sig;
            out.literal = a.literal && b.literal;
            return out;
        }
        case Expr::Kind::Compare: {
            const EvalValue a = eval(*e.a);
            const EvalValue b = eval(*e.b);
            gas_ += model_.compare_op;
            bool r = false;
            if (e.op == "<") r = a.num < b.num;
            else if (e.op == ">") r = a.num > b.num;
            else if (e.op == "<=") r = a.num <= b.num;
            else if (e.op == ">=") r = a.num >= b.num;
            else if (e.op == "==") r = a.num == b.num;
            else if (e.op == "!=") r = a.num != b.num;
            EvalValue out;
            out.num = r ? 1 : 0;
            out.boolean = true;
            out.width = 0;
            return out;
        }
        case Expr::Kind::Ternary: {
            const EvalValue cond = eval(*e.a);
            gas_ += model_.branch_op;
            return cond.num != 0 ? eval(*e.b) : eval(*e.c);
        }
        case Expr::Kind::Cast: {
            EvalValue inner = eval(*e.a);
            EvalValue out;
            out.width = sol_type_width(e.cast_type);
            out.sig = sol_type_is_signed(e.cast_type);
            out.num = inner.num;
            if (out.width < 128) {
                // Solidity casts truncate; wrap the exact value into range.
                const i128 modulus = i128(1) << out.width;
                i128 wrapped = out.num % modulus;
                if (wrapped < 0) wrapped += modulus;
                if (out.sig && wrapped >= modulus / 2) wrapped -= modulus;
                out.num = wrapped;
            }
            return out;
        }
        }
        revert(false, "unreachable expression");
    }

    void exec_block(const std::vector<Stmt>& body) {
        for (const Stmt& stmt : body) exec_stmt(stmt);
    }

    void exec_stmt(const Stmt& stmt) {
        switch (stmt.kind) {
        case Stmt::Kind::LocalDecl: {
            EvalValue value;
            value.width = sol_type_width(stmt.decl_type);
            value.sig = sol_type_is_signed(stmt.decl_type);
            if (stmt.value) {
                const EvalValue init = eval(*stmt.value);
                value.num = init.num;
                value.addr = init.addr;
                value.is_address = init.is_address;
            }
            gas_ += model_.memory_op;
            scopes_.back()[stmt.name] = value;
            break;
        }
        case Stmt::Kind::Assign: {
            const EvalValue value = eval(*stmt.value);
            if (EvalValue* local = find_local(stmt.name)) {
                gas_ += model_.memory_op;
                local->num = value.num;
                local->addr = value.addr;
                local->is_address = value.is_address;
                break;
            }
            const auto found = state_.find(stmt.name);
            if (found == state_.end()) revert(false, "unknown assignment target " + stmt.name);
            gas_ += model_.storage_read;
            gas_ += found->second.first.num == 0 && value.num != 0
                        ? model_.storage_write_init
                        : model_.storage_write_update;
            found->second.first.num = value.num;
            break;
        }
        case Stmt::Kind::BalanceOp: {
            Expr index;
            index.kind = Expr::Kind::Identifier;
            index.name = stmt.name;
            const EvalValue key = eval(index);
            if (!key.is_address) revert(false, "balances index is not an address");
            const EvalValue delta = eval(*stmt.value);
            gas_ += model_.storage_read;
            const i128 prev = deltas_.count(key.addr) ? deltas_[key.addr] : 0;
            const i128 next = stmt.balance_add ? prev + delta.num : prev - delta.num;
            gas_ += prev == 0 && next != 0 ? model_.storage_write_init
                                           : model_.storage_write_update;
            deltas_[key.addr] = next;
            break;
        }
        case Stmt::Kind::If: {
            const EvalValue cond = eval(*stmt.cond);
            gas_ += model_.branch_op;
            scopes_.emplace_back();
            exec_block(cond.num != 0 ? stmt.then_body : stmt.else_body);
            scopes_.pop_back();
            break;
        }
        }
    }

    const GasModel& model_;
    FunctionReport& report_;
    std::map<std::string, std::pair<TypedValue, SolType>> state_;
    std::vector<std::map<std::string, EvalValue>> scopes_;
    BalanceDeltas deltas_;
    long long gas_ = 0;
};

} // namespace

FunctionReport simulate_function(const AssembledFunction& fn,
                                 const AssembledContract& contract,
                                 const GasModel& model) {
    FunctionReport report;
    report.name = fn.name;
    for (const auto& [op_class, count] : fn.static_op_costs)
        report.gas += model.unit(op_class) * count;

    Simulator sim(contract, model, report);
    sim.run(fn);
    return report;
}

int storage_slot_count(const AssembledContract& contract) {
    int slots = 0;
    int used_bits = 0;
    for (const StateVariable& var : contract.variables) {
        if (var.type == SolType::String) {
            slots += var.extra_slots > 0 ? var.extra_slots : 1;
            used_bits = 256; // a dedicated slot never shares
            continue;
        }
        const int width = sol_type_width(var.type);
        if (slots == 0 || used_bits + width > 256) {
            slots += 1;
            used_bits = width;
        } else {
            used_bits += width;
        }
    }
    return slots + 1; // balances mapping
}

long long gas_deploy(const AssembledContract& contract, const GasModel& model) {
    return model.base_deploy +
           model.per_storage_slot * storage_slot_count(contract) +
           model.per_code_byte * static_cast<long long>(contract.source.size()) +
           model.per_constructor_param *
               static_cast<long long>(contract.constructor_params.size());
}

EvaluationReport evaluate(const AssembledContract& contract,
                          const std::map<std::string, std::string>& function_rules,
                          const GasModel& model) {
    EvaluationReport report;
    report.model_version = model.version;
    report.static_errors = static_check(contract);
    report.distinct_errors = distinct_error_count(report.static_errors);
    report.compile_ok = report.distinct_errors == 0;
    if (!report.compile_ok) return report;

    VariableBindings values;
    for (const StateVariable& var : contract.variables)
        values.ordered.emplace_back(var.name, var.value);

    report.deploy_gas = gas_deploy(contract, model);
    for (const AssembledFunction& fn : contract.functions) {
        const auto rule = function_rules.find(fn.name);
        if (rule == function_rules.end())
            raise(ErrorCode::UnknownSettlementRule, "no rule bound for " + fn.name);
        FunctionReport fn_report = simulate_function(fn, contract, model);
        fn_report.expected = oracle_expected_state(rule->second, values);
        fn_report.passed = !fn_report.reverted &&
                           deltas_equal(fn_report.actual, fn_report.expected);
        report.functions_passed += fn_report.passed ? 1 : 0;
        report.functions.push_back(std::move(fn_report));
    }
    return report;
}

} // namespace gascraft
