#include "simpson/expr.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <utility>

namespace simpson {

ParseError::ParseError(std::size_t position, const std::string& message)
    : std::runtime_error("parse error at offset " + std::to_string(position) + ": " + message),
      position_(position),
      detail_(message) {}

DomainError::DomainError(std::string subexpression, double argument, std::string bindings,
                         const std::string& what)
    : std::runtime_error(what + " in '" + subexpression + "'" +
                         (bindings.empty() ? std::string() : " at " + bindings)),
      subexpression_(std::move(subexpression)),
      argument_(argument),
      bindings_(std::move(bindings)) {}

namespace detail {

enum class Op {
    Number,
    Variable,
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Sqrt,
    If,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    And,
    Or,
};

struct Node {
    Op op;
    double value = 0.0;
    std::size_t var = 0;
    std::array<int, 3> kids{-1, -1, -1};
};

struct ExprTree {
    std::string source;
    std::vector<std::string> variables;
    std::vector<Node> nodes;
    int root = -1;
};

}  // namespace detail

namespace {

using detail::ExprTree;
using detail::Node;
using detail::Op;

struct FunctionInfo {
    std::string_view name;
    Op op;
    int arity;
};

constexpr std::array<FunctionInfo, 7> kFunctions{{
    {"sin", Op::Sin, 1},
    {"cos", Op::Cos, 1},
    {"exp", Op::Exp, 1},
    {"log", Op::Log, 1},
    {"abs", Op::Abs, 1},
    {"sqrt", Op::Sqrt, 1},
    {"if", Op::If, 3},
}};

bool is_condition(Op op) {
    switch (op) {
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge:
    case Op::Eq:
    case Op::And:
    case Op::Or:
        return true;
    default:
        return false;
    }
}

enum class Tok { Number, Ident, Op, LParen, RParen, Comma, End };

struct Token {
    Tok kind;
    std::size_t pos;
    std::string_view text;
    double number = 0.0;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (digit(c) || (c == '.' && i + 1 < s.size() && digit(s[i + 1]))) {
            while (i < s.size() && digit(s[i])) ++i;
            if (i < s.size() && s[i] == '.') {
                ++i;
                while (i < s.size() && digit(s[i])) ++i;
            }
            if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
                if (j < s.size() && digit(s[j])) {
                    while (j < s.size() && digit(s[j])) ++j;
                    i = j;
                }
            }
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(s.data() + start, s.data() + i, v);
            if (ec != std::errc() || ptr != s.data() + i || !std::isfinite(v))
                throw ParseError(start, "invalid numeric literal '" + std::string(s.substr(start, i - start)) + "'");
            out.push_back({Tok::Number, start, s.substr(start, i - start), v});
            continue;
        }
        if (ident_start(c)) {
            while (i < s.size() && ident_char(s[i])) ++i;
            out.push_back({Tok::Ident, start, s.substr(start, i - start)});
            continue;
        }
        switch (c) {
        case '(':
            out.push_back({Tok::LParen, start, s.substr(start, 1)});
            ++i;
            continue;
        case ')':
            out.push_back({Tok::RParen, start, s.substr(start, 1)});
            ++i;
            continue;
        case ',':
            out.push_back({Tok::Comma, start, s.substr(start, 1)});
            ++i;
            continue;
        case '+':
        case '-':
        case '*':
        case '/':
        case '^':
            out.push_back({Tok::Op, start, s.substr(start, 1)});
            ++i;
            continue;
        case '<':
        case '>':
            if (i + 1 < s.size() && s[i + 1] == '=') {
                out.push_back({Tok::Op, start, s.substr(start, 2)});
                i += 2;
            } else {
                out.push_back({Tok::Op, start, s.substr(start, 1)});
                ++i;
            }
            continue;
        case '=':
            if (i + 1 < s.size() && s[i + 1] == '=') {
                out.push_back({Tok::Op, start, s.substr(start, 2)});
                i += 2;
                continue;
            }
            throw ParseError(start, "expected '=='");
        default:
            throw ParseError(start, std::string("unexpected character '") + c + "'");
        }
    }
    out.push_back({Tok::End, s.size(), {}});
    return out;
}

class Parser {
public:
    Parser(ExprTree& tree, std::vector<Token> tokens) : tree_(tree), toks_(std::move(tokens)) {}

    int parse_all() {
        const int root = parse_or();
        if (peek().kind != Tok::End) throw ParseError(peek().pos, "unexpected '" + std::string(peek().text) + "'");
        require_number(root, 0);
        return root;
    }

private:
    const Token& peek() const { return toks_[at_]; }
    const Token& next() { return toks_[at_++]; }

    bool peek_keyword(std::string_view kw) const { return peek().kind == Tok::Ident && peek().text == kw; }
    bool peek_op(std::string_view op) const { return peek().kind == Tok::Op && peek().text == op; }

    int add(Node n) {
        tree_.nodes.push_back(n);
        return static_cast<int>(tree_.nodes.size() - 1);
    }
    int binary(Op op, int l, int r) { return add(Node{op, 0.0, 0, {l, r, -1}}); }

    void require_number(int node, std::size_t pos) const {
        if (is_condition(tree_.nodes[static_cast<std::size_t>(node)].op))
            throw ParseError(pos, "condition used where a numeric value is required");
    }
    void require_condition(int node, std::size_t pos) const {
        if (!is_condition(tree_.nodes[static_cast<std::size_t>(node)].op))
            throw ParseError(pos, "expected a condition (comparison, 'and', 'or')");
    }

    int parse_or() {
        const std::size_t lpos = peek().pos;
        int left = parse_and();
        while (peek_keyword("or")) {
            next();
            require_condition(left, lpos);
            const std::size_t rpos = peek().pos;
            const int right = parse_and();
            require_condition(right, rpos);
            left = binary(Op::Or, left, right);
        }
        return left;
    }

    int parse_and() {
        const std::size_t lpos = peek().pos;
        int left = parse_cmp();
        while (peek_keyword("and")) {
            next();
            require_condition(left, lpos);
            const std::size_t rpos = peek().pos;
            const int right = parse_cmp();
            require_condition(right, rpos);
            left = binary(Op::And, left, right);
        }
        return left;
    }

    int parse_cmp() {
        const std::size_t lpos = peek().pos;
        const int left = parse_add();
        if (peek().kind != Tok::Op) return left;
        static constexpr std::array<std::pair<std::string_view, Op>, 5> cmps{{
            {"<", Op::Lt},
            {"<=", Op::Le},
            {">", Op::Gt},
            {">=", Op::Ge},
            {"==", Op::Eq},
        }};
        for (const auto& [text, op] : cmps) {
            if (peek().text == text) {
                next();
                require_number(left, lpos);
                const std::size_t rpos = peek().pos;
                const int right = parse_add();
                require_number(right, rpos);
                return binary(op, left, right);
            }
        }
        return left;
    }

    int parse_add() {
        const std::size_t lpos = peek().pos;
        int left = parse_mul();
        while (peek_op("+") || peek_op("-")) {
            const Op op = next().text == "+" ? Op::Add : Op::Sub;
            require_number(left, lpos);
            const std::size_t rpos = peek().pos;
            const int right = parse_mul();
            require_number(right, rpos);
            left = binary(op, left, right);
        }
        return left;
    }

    int parse_mul() {
        const std::size_t lpos = peek().pos;
        int left = parse_unary();
        while (peek_op("*") || peek_op("/")) {
            const Op op = next().text == "*" ? Op::Mul : Op::Div;
            require_number(left, lpos);
            const std::size_t rpos = peek().pos;
            const int right = parse_unary();
            require_number(right, rpos);
            left = binary(op, left, right);
        }
        return left;
    }

    int parse_unary() {
        if (peek_op("-")) {
            next();
            const std::size_t pos = peek().pos;
            const int operand = parse_unary();
            require_number(operand, pos);
            return add(Node{Op::Neg, 0.0, 0, {operand, -1, -1}});
        }
        return parse_power();
    }

    // Exponent is parsed at unary level so that 2^-1 works and 2^3^2 = 2^(3^2).
    int parse_power() {
        const std::size_t bpos = peek().pos;
        const int base = parse_atom();
        if (!peek_op("^")) return base;
        next();
        require_number(base, bpos);
        const std::size_t epos = peek().pos;
        const int exponent = parse_unary();
        require_number(exponent, epos);
        return binary(Op::Pow, base, exponent);
    }

    int parse_atom() {
        const Token& t = peek();
        switch (t.kind) {
        case Tok::Number:
            next();
            return add(Node{Op::Number, t.number});
        case Tok::LParen: {
            next();
            const int inner = parse_or();
            expect(Tok::RParen, "')'");
            return inner;
        }
        case Tok::Ident:
            return parse_identifier();
        case Tok::End:
            throw ParseError(t.pos, "unexpected end of expression");
        default:
            throw ParseError(t.pos, "unexpected '" + std::string(t.text) + "'");
        }
    }

    int parse_identifier() {
        const Token name = next();
        if (peek().kind == Tok::LParen) {
            const auto fn = std::find_if(kFunctions.begin(), kFunctions.end(),
                                         [&](const FunctionInfo& f) { return f.name == name.text; });
            if (fn == kFunctions.end())
                throw ParseError(name.pos, "unknown function '" + std::string(name.text) + "'");
            next();
            std::vector<std::pair<int, std::size_t>> args;
            if (peek().kind != Tok::RParen) {
                for (;;) {
                    const std::size_t apos = peek().pos;
                    args.emplace_back(parse_or(), apos);
                    if (peek().kind != Tok::Comma) break;
                    next();
                }
            }
            expect(Tok::RParen, "')'");
            if (static_cast<int>(args.size()) != fn->arity)
                throw ParseError(name.pos, "function '" + std::string(fn->name) + "' expects " +
                                               std::to_string(fn->arity) + " argument(s), got " +
                                               std::to_string(args.size()));
            Node n{fn->op};
            for (std::size_t k = 0; k < args.size(); ++k) {
                if (fn->op == Op::If && k == 0)
                    require_condition(args[k].first, args[k].second);
                else
                    require_number(args[k].first, args[k].second);
                n.kids[k] = args[k].first;
            }
            return add(n);
        }
        const auto& vars = tree_.variables;
        const auto it = std::find(vars.begin(), vars.end(), name.text);
        if (it != vars.end())
            return add(Node{Op::Variable, 0.0, static_cast<std::size_t>(it - vars.begin())});
        if (name.text == "pi") return add(Node{Op::Number, std::numbers::pi});
        if (name.text == "and" || name.text == "or")
            throw ParseError(name.pos, "unexpected '" + std::string(name.text) + "'");
        throw ParseError(name.pos, "unknown variable '" + std::string(name.text) + "'");
    }

    void expect(Tok kind, const char* what) {
        if (peek().kind != kind) {
            const Token& t = peek();
            throw ParseError(t.pos, std::string("expected ") + what +
                                        (t.kind == Tok::End ? " before end of expression"
                                                            : ", found '" + std::string(t.text) + "'"));
        }
        next();
    }

    ExprTree& tree_;
    std::vector<Token> toks_;
    std::size_t at_ = 0;
};

std::string format_number(double v) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    return std::string(buf.data(), ptr);
}

const char* op_symbol(Op op) {
    switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Pow: return "^";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::Eq: return "==";
    case Op::And: return "and";
    case Op::Or: return "or";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Abs: return "abs";
    case Op::Sqrt: return "sqrt";
    case Op::If: return "if";
    default: return "?";
    }
}

void render(const ExprTree& t, int index, std::string& out) {
    const Node& n = t.nodes[static_cast<std::size_t>(index)];
    switch (n.op) {
    case Op::Number:
        out += format_number(n.value);
        return;
    case Op::Variable:
        out += t.variables[n.var];
        return;
    case Op::Neg:
        out += "(-";
        render(t, n.kids[0], out);
        out += ")";
        return;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Log:
    case Op::Abs:
    case Op::Sqrt:
        out += op_symbol(n.op);
        out += "(";
        render(t, n.kids[0], out);
        out += ")";
        return;
    case Op::If:
        out += "if(";
        render(t, n.kids[0], out);
        out += ", ";
        render(t, n.kids[1], out);
        out += ", ";
        render(t, n.kids[2], out);
        out += ")";
        return;
    default:
        out += "(";
        render(t, n.kids[0], out);
        out += " ";
        out += op_symbol(n.op);
        out += " ";
        render(t, n.kids[1], out);
        out += ")";
        return;
    }
}

std::string render_node(const ExprTree& t, int index) {
    std::string s;
    render(t, index, s);
    return s;
}

class Evaluator {
public:
    Evaluator(const ExprTree& t, std::span<const double> values) : t_(t), values_(values) {}

    double eval(int index) const {
        const Node& n = t_.nodes[static_cast<std::size_t>(index)];
        switch (n.op) {
        case Op::Number:
            return n.value;
        case Op::Variable:
            return values_[n.var];
        case Op::Neg:
            return -eval(n.kids[0]);
        case Op::Add:
            return finite(index, eval(n.kids[0]) + eval(n.kids[1]));
        case Op::Sub:
            return finite(index, eval(n.kids[0]) - eval(n.kids[1]));
        case Op::Mul:
            return finite(index, eval(n.kids[0]) * eval(n.kids[1]));
        case Op::Div: {
            const double num = eval(n.kids[0]);
            const double den = eval(n.kids[1]);
            if (den == 0.0) fail(index, den, "division by zero");
            return finite(index, num / den);
        }
        case Op::Pow:
            return finite(index, std::pow(eval(n.kids[0]), eval(n.kids[1])));
        case Op::Sin:
            return finite(index, std::sin(eval(n.kids[0])));
        case Op::Cos:
            return finite(index, std::cos(eval(n.kids[0])));
        case Op::Exp:
            return finite(index, std::exp(eval(n.kids[0])));
        case Op::Log: {
            const double x = eval(n.kids[0]);
            if (!(x > 0.0)) fail(index, x, "log of non-positive argument " + format_number(x));
            return std::log(x);
        }
        case Op::Abs:
            return std::fabs(eval(n.kids[0]));
        case Op::Sqrt: {
            const double x = eval(n.kids[0]);
            if (!(x >= 0.0)) fail(index, x, "sqrt of negative argument " + format_number(x));
            return std::sqrt(x);
        }
        case Op::If:
            return truth(n.kids[0]) ? eval(n.kids[1]) : eval(n.kids[2]);
        default:
            return truth(index) ? 1.0 : 0.0;
        }
    }

    bool truth(int index) const {
        const Node& n = t_.nodes[static_cast<std::size_t>(index)];
        switch (n.op) {
        case Op::Lt: return eval(n.kids[0]) < eval(n.kids[1]);
        case Op::Le: return eval(n.kids[0]) <= eval(n.kids[1]);
        case Op::Gt: return eval(n.kids[0]) > eval(n.kids[1]);
        case Op::Ge: return eval(n.kids[0]) >= eval(n.kids[1]);
        case Op::Eq: return eval(n.kids[0]) == eval(n.kids[1]);
        case Op::And: return truth(n.kids[0]) && truth(n.kids[1]);
        case Op::Or: return truth(n.kids[0]) || truth(n.kids[1]);
        default: return eval(index) != 0.0;
        }
    }

private:
    double finite(int index, double v) const {
        if (!std::isfinite(v)) fail(index, v, "non-finite result");
        return v;
    }

    [[noreturn]] void fail(int index, double argument, const std::string& what) const {
        std::string bindings;
        for (std::size_t i = 0; i < t_.variables.size(); ++i) {
            if (i) bindings += ", ";
            bindings += t_.variables[i] + "=" + format_number(values_[i]);
        }
        throw DomainError(render_node(t_, index), argument, std::move(bindings), what);
    }

    const ExprTree& t_;
    std::span<const double> values_;
};

}  // namespace

Expr Expr::parse(std::string_view source, std::vector<std::string> variables) {
    auto tree = std::make_shared<ExprTree>();
    tree->source = std::string(source);
    tree->variables = std::move(variables);
    auto tokens = tokenize(source);
    if (tokens.size() == 1) throw ParseError(0, "empty expression");
    Parser parser(*tree, std::move(tokens));
    tree->root = parser.parse_all();
    return Expr(std::move(tree));
}

double Expr::eval(std::span<const double> values) const {
    if (values.size() != tree_->variables.size())
        throw std::invalid_argument("expression over " + std::to_string(tree_->variables.size()) +
                                    " variable(s) evaluated with " + std::to_string(values.size()) +
                                    " value(s)");
    return Evaluator(*tree_, values).eval(tree_->root);
}

double Expr::eval(const std::map<std::string, double>& bindings) const {
    std::vector<double> values;
    values.reserve(tree_->variables.size());
    for (const auto& name : tree_->variables) {
        const auto it = bindings.find(name);
        if (it == bindings.end()) throw std::invalid_argument("no binding for variable '" + name + "'");
        values.push_back(it->second);
    }
    return eval(values);
}

double Expr::operator()(double x) const {
    const std::array<double, 1> v{x};
    return eval(v);
}

std::string Expr::to_string() const { return render_node(*tree_, tree_->root); }

const std::string& Expr::source() const noexcept { return tree_->source; }

const std::vector<std::string>& Expr::variables() const noexcept { return tree_->variables; }

DerivativeReport check_derivative(const Expr& f, const Expr& df, double lo, double hi, std::size_t points,
                                  double rel_tol) {
    if (!(lo < hi)) throw std::invalid_argument("check_derivative: require lo < hi");
    if (points < 3) throw std::invalid_argument("check_derivative: require at least 3 points");
    DerivativeReport report;
    const double spacing = (hi - lo) / static_cast<double>(points + 1);
    for (std::size_t i = 1; i <= points; ++i) {
        const double x = lo + spacing * static_cast<double>(i);
        const double h = std::min(std::max(1e-6, 1e-6 * std::fabs(x)), 0.5 * spacing);
        const double fd = (f(x + h) - f(x - h)) / (2.0 * h);
        const double d = df(x);
        const double scale = std::max({std::fabs(d), std::fabs(fd), 1.0});
        const double mismatch = std::fabs(d - fd) / scale;
        ++report.samples;
        if (mismatch > report.worst_mismatch) {
            report.worst_mismatch = mismatch;
            report.witness_x = x;
            report.witness_df = d;
            report.witness_fd = fd;
        }
    }
    report.passed = report.worst_mismatch <= rel_tol;
    if (report.passed) report.witness_x.reset();
    return report;
}

}  // namespace simpson
