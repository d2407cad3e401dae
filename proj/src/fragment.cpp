// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "gascraft/fragment.hpp"

#include <cctype>

namespace gascraft {

std::string_view sol_type_name(SolType t) {
    switch (t) {
        case SolType::U32: return "uint32";
        case SolType::U64: return "uint64";
        case SolType::U128: return "uint128";
        case SolType::U256: return "uint256";
        case SolType::I64: return "int64";
        case SolType::I256: return "int256";
        case SolType::Address: return "address";
        case SolType::String: return "string";
    }
    return "unknown";
}

std::optional<SolType> sol_type_from_name(std::string_view name) {
    for (int i = 0; i <= static_cast<int>(SolType::String); ++i) {
        const auto t = static_cast<SolType>(i);
        if (sol_type_name(t) == name) return t;
    }
    return std::nullopt;
}

int sol_type_width(SolType t) {
    switch (t) {
        case SolType::U32: return 32;
        case SolType::U64: return 64;
        case SolType::U128: return 128;
        case SolType::U256: return 256;
        case SolType::I64: return 64;
        case SolType::I256: return 256;
        case SolType::Address: return 160;
        case SolType::String: return 256;
    }
    return 256;
}

bool sol_type_is_numeric(SolType t) {
    return t != SolType::Address && t != SolType::String;
}

bool sol_type_is_signed(SolType t) {
    return t == SolType::I64 || t == SolType::I256;
}

namespace {

enum class Tok {
    End,
    Ident,
    Number,
    HexLiteral,
    StringLiteral,
    Placeholder,
    Punct,      // single or double char operator / separator in `text`
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    i128 number = 0;
};

class Lexer {
  public:
    Lexer(const std::string& src, bool allow_placeholders)
        : src_(src), allow_placeholders_(allow_placeholders) {}

    bool ok() const { return error_.empty(); }
    const std::string& error() const { return error_; }

    std::vector<Token> run() {
        std::vector<Token> out;
        while (ok()) {
            const Token t = next();
            out.push_back(t);
            if (t.kind == Tok::End) break;
        }
        return out;
    }

  private:
    Token next() {
        skip_space();
        if (pos_ >= src_.size()) return {};

        const char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident();
        if (std::isdigit(static_cast<unsigned char>(c))) return number();
        if (c == '"') return string_literal();
        if (c == '<') {
            const Token ph = try_placeholder();
            if (ph.kind == Tok::Placeholder) return ph;
        }
        return punct();
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    Token ident() {
        Token t;
        t.kind = Tok::Ident;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            t.text.push_back(src_[pos_++]);
        return t;
    }

    Token number() {
        Token t;
        if (src_[pos_] == '0' && pos_ + 1 < src_.size() &&
            (src_[pos_ + 1] == 'x' || src_[pos_ + 1] == 'X')) {
            t.kind = Tok::HexLiteral;
            t.text = "0x";
            pos_ += 2;
            while (pos_ < src_.size() &&
                   std::isxdigit(static_cast<unsigned char>(src_[pos_])))
                t.text.push_back(src_[pos_++]);
            if (t.text.size() <= 2) fail("empty hex literal");
            return t;
        }
        t.kind = Tok::Number;
        std::string digits;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
            digits.push_back(src_[pos_++]);
        try {
            t.number = i128_from_string(digits);
        } catch (const GascraftError&) {
            fail("numeric literal out of range");
        }
        t.text = digits;
        return t;
    }

    Token string_literal() {
        Token t;
        t.kind = Tok::StringLiteral;
        ++pos_; // opening quote
        while (pos_ < src_.size() && src_[pos_] != '"') {
            if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) ++pos_;
            t.text.push_back(src_[pos_++]);
        }
        if (pos_ >= src_.size()) {
            fail("unterminated string literal");
            return t;
        }
        ++pos_; // closing quote
        return t;
    }

    // <name_VALUE> placeholder; on mismatch the caller falls back to punct().
    Token try_placeholder() {
        const std::size_t start = pos_;
        ++pos_;
        std::string name;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            name.push_back(src_[pos_++]);
        const std::string suffix = "_VALUE";
        if (pos_ < src_.size() && src_[pos_] == '>' && name.size() > suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
            ++pos_;
            if (!allow_placeholders_) {
                fail("placeholder in rendered fragment");
                return {};
            }
            Token t;
            t.kind = Tok::Placeholder;
            t.text = name.substr(0, name.size() - suffix.size());
            return t;
        }
        pos_ = start;
        return {};
    }

    Token punct() {
        static const char* two_char[] = {"<=", ">=", "==", "!=", "+=", "-=", "=>"};
        Token t;
        t.kind = Tok::Punct;
        for (const char* op : two_char) {
            if (src_.compare(pos_, 2, op) == 0) {
                t.text = op;
                pos_ += 2;
                return t;
            }
        }
        t.text = src_.substr(pos_, 1);
        ++pos_;
        static const std::string allowed = "(){}[];,=+-*/%?:<>";
        if (allowed.find(t.text[0]) == std::string::npos) fail("unexpected character");
        return t;
    }

    void fail(const std::string& msg) {
        if (error_.empty()) error_ = msg;
        pos_ = src_.size();
    }

    const std::string& src_;
    bool allow_placeholders_;
    std::size_t pos_ = 0;
    std::string error_;
};

class Parser {
  public:
    Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    bool ok() const { return error_.empty(); }
    const std::string& error() const { return error_; }

    const Token& peek() const { return tokens_[std::min(pos_, tokens_.size() - 1)]; }

    bool at_punct(const std::string& p) const {
        return peek().kind == Tok::Punct && peek().text == p;
    }
    bool at_ident(const std::string& word) const {
        return peek().kind == Tok::Ident && peek().text == word;
    }

    Token take() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

    bool expect_punct(const std::string& p) {
        if (!at_punct(p)) return fail("expected '" + p + "'");
        ++pos_;
        return true;
    }
    bool expect_ident(const std::string& word) {
        if (!at_ident(word)) return fail("expected '" + word + "'");
        ++pos_;
        return true;
    }

    bool fail(const std::string& msg) {
        if (error_.empty()) error_ = msg;
        return false;
    }

    std::optional<SolType> take_type() {
        if (peek().kind != Tok::Ident) return std::nullopt;
        const auto t = sol_type_from_name(peek().text);
        if (t) ++pos_;
        return t;
    }

    ExprPtr parse_expr() { return parse_ternary(); }

    ExprPtr parse_ternary() {
        ExprPtr cond = parse_compare();
        if (!cond || !at_punct("?")) return cond;
        ++pos_;
        auto node = std::make_unique<Expr>();
        node->kind = Expr::Kind::Ternary;
        node->a = std::move(cond);
        node->b = parse_expr();
        if (!node->b) return nullptr;
        if (!expect_punct(":")) return nullptr;
        node->c = parse_expr();
        if (!node->c) return nullptr;
        return node;
    }

    ExprPtr parse_compare() {
        ExprPtr lhs = parse_additive();
        if (!lhs) return nullptr;
        static const char* cmps[] = {"<=", ">=", "==", "!=", "<", ">"};
        for (const char* op : cmps) {
            if (at_punct(op)) {
                ++pos_;
                auto node = std::make_unique<Expr>();
                node->kind = Expr::Kind::Compare;
                node->op = op;
                node->a = std::move(lhs);
                node->b = parse_additive();
                if (!node->b) return nullptr;
                return node;
            }
        }
        return lhs;
    }

    ExprPtr parse_additive() {
        ExprPtr lhs = parse_multiplicative();
        if (!lhs) return nullptr;
        while (at_punct("+") || at_punct("-")) {
            auto node = std::make_unique<Expr>();
            node->kind = Expr::Kind::Binary;
            node->op = take().text;
            node->a = std::move(lhs);
            node->b = parse_multiplicative();
            if (!node->b) return nullptr;
            lhs = std::move(node);
        }
        return lhs;
    }

    ExprPtr parse_multiplicative() {
        ExprPtr lhs = parse_primary();
        if (!lhs) return nullptr;
        while (at_punct("*") || at_punct("/") || at_punct("%")) {
            auto node = std::make_unique<Expr>();
            node->kind = Expr::Kind::Binary;
            node->op = take().text;
            node->a = std::move(lhs);
            node->b = parse_primary();
            if (!node->b) return nullptr;
            lhs = std::move(node);
        }
        return lhs;
    }

    ExprPtr parse_primary() {
        if (peek().kind == Tok::Number) {
            auto node = std::make_unique<Expr>();
            node->kind = Expr::Kind::Number;
            node->number = take().number;
            return node;
        }
        if (peek().kind == Tok::Placeholder) {
            // Placeholders in expression position stand for numeric literals.
            auto node = std::make_unique<Expr>();
            node->kind = Expr::Kind::Number;
            node->name = take().text;
            return node;
        }
        if (at_punct("(")) {
            ++pos_;
            ExprPtr inner = parse_expr();
            if (!inner || !expect_punct(")")) return nullptr;
            return inner;
        }
        if (peek().kind == Tok::Ident) {
            const auto cast = sol_type_from_name(peek().text);
            if (cast && tokens_.size() > pos_ + 1 && tokens_[pos_ + 1].kind == Tok::Punct &&
                tokens_[pos_ + 1].text == "(") {
                ++pos_;
                ++pos_;
                auto node = std::make_unique<Expr>();
                node->kind = Expr::Kind::Cast;
                node->cast_type = *cast;
                node->a = parse_expr();
                if (!node->a || !expect_punct(")")) return nullptr;
                return node;
            }
            auto node = std::make_unique<Expr>();
            node->kind = Expr::Kind::Identifier;
            node->name = take().text;
            return node;
        }
        fail("expected expression");
        return nullptr;
    }

    bool parse_stmt(Stmt& out) {
        if (at_ident("if")) return parse_if(out);
        if (at_ident("balances")) return parse_balance_op(out);

        const auto type = take_type();
        if (type) {
            out.kind = Stmt::Kind::LocalDecl;
            out.decl_type = *type;
            if (peek().kind != Tok::Ident) return fail("expected local name");
            out.name = take().text;
            if (at_punct("=")) {
                ++pos_;
                out.value = parse_expr();
                if (!out.value) return false;
            }
            return expect_punct(";");
        }

        if (peek().kind == Tok::Ident) {
            out.kind = Stmt::Kind::Assign;
            out.name = take().text;
            if (!expect_punct("=")) return false;
            out.value = parse_expr();
            if (!out.value) return false;
            return expect_punct(";");
        }
        return fail("expected statement");
    }

    bool parse_if(Stmt& out) {
        out.kind = Stmt::Kind::If;
        ++pos_; // if
        if (!expect_punct("(")) return false;
        out.cond = parse_expr();
        if (!out.cond || !expect_punct(")")) return false;
        if (!parse_block(out.then_body)) return false;
        if (at_ident("else")) {
            ++pos_;
            if (!parse_block(out.else_body)) return false;
        }
        return true;
    }

    bool parse_balance_op(Stmt& out) {
        out.kind = Stmt::Kind::BalanceOp;
        ++pos_; // balances
        if (!expect_punct("[")) return false;
        if (peek().kind != Tok::Ident) return fail("balances index must be an identifier");
        out.name = take().text;
        if (!expect_punct("]")) return false;
        if (at_punct("+=")) {
            out.balance_add = true;
        } else if (at_punct("-=")) {
            out.balance_add = false;
        } else {
            return fail("expected += or -= on balances");
        }
        ++pos_;
        out.value = parse_expr();
        if (!out.value) return false;
        return expect_punct(";");
    }

    bool parse_block(std::vector<Stmt>& out) {
        if (!expect_punct("{")) return false;
        while (!at_punct("}")) {
            if (peek().kind == Tok::End) return fail("unterminated block");
            Stmt s;
            if (!parse_stmt(s)) return false;
            out.push_back(std::move(s));
        }
        ++pos_;
        return true;
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::string error_;
};

ParseResult failure(const std::string& msg) { return {false, msg}; }

} // namespace

ParseResult parse_var_decl(const std::string& text, bool allow_placeholders,
                           VarDeclFragment& out) {
    Lexer lexer(text, allow_placeholders);
    auto tokens = lexer.run();
    if (!lexer.ok()) return failure(lexer.error());
    Parser p(std::move(tokens));

    const auto type = p.take_type();
    if (!type) return failure("variable fragment must start with a type");
    out.type = *type;
    out.is_public = false;
    if (p.at_ident("public")) {
        out.is_public = true;
        p.take();
    }
    if (p.peek().kind != Tok::Ident) return failure("expected variable name");
    out.name = p.take().text;

    if (p.at_punct("=")) {
        p.take();
        out.has_init = true;
        const Token init = p.take();
        switch (init.kind) {
            case Tok::Placeholder:
                out.init_is_placeholder = true;
                out.placeholder = init.text;
                break;
            case Tok::Number:
                out.init_number = init.number;
                break;
            case Tok::HexLiteral:
                out.init_is_text = true;
                out.init_text = init.text;
                break;
            case Tok::StringLiteral:
                out.init_is_text = true;
                out.init_text = init.text;
                break;
            default:
                return failure("unsupported initializer");
        }
    }
    if (!p.expect_punct(";")) return failure(p.error());
    if (p.peek().kind != Tok::End) return failure("trailing tokens after declaration");
    return {true, ""};
}

ParseResult parse_function(const std::string& text, bool allow_placeholders,
                           FunctionFragment& out) {
    Lexer lexer(text, allow_placeholders);
    auto tokens = lexer.run();
    if (!lexer.ok()) return failure(lexer.error());
    Parser p(std::move(tokens));

    if (!p.expect_ident("function")) return failure(p.error());
    if (p.peek().kind != Tok::Ident) return failure("expected function name");
    out.name = p.take().text;
    if (!p.expect_punct("(") || !p.expect_punct(")")) return failure(p.error());
    if (!p.expect_ident("public")) return failure(p.error());
    if (!p.parse_block(out.body)) return failure(p.error());
    if (p.peek().kind != Tok::End) return failure("trailing tokens after function body");
    return {true, ""};
}

namespace {

void collect_expr(const Expr& e, std::vector<std::string>& out) {
    switch (e.kind) {
        case Expr::Kind::Identifier:
            out.push_back(e.name);
            break;
        case Expr::Kind::Number:
            break;
        default:
            if (e.a) collect_expr(*e.a, out);
            if (e.b) collect_expr(*e.b, out);
            if (e.c) collect_expr(*e.c, out);
    }
}

void collect_stmts(const std::vector<Stmt>& body, std::vector<std::string>& out) {
    for (const Stmt& s : body) {
        if (s.kind == Stmt::Kind::BalanceOp) out.push_back(s.name);
        if (s.value) collect_expr(*s.value, out);
        if (s.cond) collect_expr(*s.cond, out);
        collect_stmts(s.then_body, out);
        collect_stmts(s.else_body, out);
    }
}

} // namespace

void collect_identifiers(const FunctionFragment& fn, std::vector<std::string>& out) {
    collect_stmts(fn.body, out);
}

} // namespace gascraft
