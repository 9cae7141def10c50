#include "glmamp/spec_parse.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <set>
#include <vector>

namespace glmamp {

namespace {

std::string annotate(std::string_view input, std::size_t position, const std::string& message) {
    position = std::min(position, input.size());
    std::string out = message + " at position " + std::to_string(position) + "\n  " +
                      std::string(input) + "\n  " + std::string(position, ' ') + "^";
    return out;
}

struct Argument {
    double value;
    std::size_t position;
};

struct Call {
    std::string name;
    std::map<std::string, Argument> args;
};

class Lexer {
public:
    explicit Lexer(std::string_view s) : s_(s) {}

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool at_end() {
        skip_ws();
        return pos_ >= s_.size();
    }
    std::size_t pos() const { return pos_; }

    std::string identifier() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
            ++pos_;
        }
        if (start == pos_) fail(start, "expected identifier");
        return std::string(s_.substr(start, pos_ - start));
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(pos_, std::string("expected '") + c + "'");
    }

    double number() {
        skip_ws();
        const std::size_t start = pos_;
        double value = 0.0;
        const char* first = s_.data() + pos_;
        const char* last = s_.data() + s_.size();
        if (first != last && *first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr == first) fail(start, "expected number");
        pos_ = static_cast<std::size_t>(ptr - s_.data());
        return value;
    }

    [[noreturn]] void fail(std::size_t at, const std::string& message) const {
        throw SpecParseError(s_, at, message);
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

Call parse_call(std::string_view text) {
    Lexer lex(text);
    Call call;
    call.name = lex.identifier();
    lex.expect('(');
    if (!lex.accept(')')) {
        do {
            lex.skip_ws();
            const std::size_t key_pos = lex.pos();
            std::string key = lex.identifier();
            lex.expect('=');
            lex.skip_ws();
            const std::size_t value_pos = lex.pos();
            const double value = lex.number();
            if (call.args.count(key)) lex.fail(key_pos, "duplicate argument '" + key + "'");
            call.args.emplace(std::move(key), Argument{value, value_pos});
        } while (lex.accept(','));
        lex.expect(')');
    }
    if (!lex.at_end()) lex.fail(lex.pos(), "trailing characters");
    return call;
}

class Binder {
public:
    Binder(std::string_view text, const Call& call, std::set<std::string> allowed)
        : text_(text), call_(call) {
        for (const auto& [key, arg] : call.args) {
            if (!allowed.count(key)) {
                throw SpecParseError(text_, key_position(key),
                                     "unknown argument '" + key + "' for " + call.name);
            }
        }
    }

    double get(const std::string& key, double fallback) const {
        const auto it = call_.args.find(key);
        return it == call_.args.end() ? fallback : it->second.value;
    }

    double require(const std::string& key) const {
        const auto it = call_.args.find(key);
        if (it == call_.args.end()) {
            throw SpecParseError(text_, text_.size(), call_.name + ": missing argument '" + key + "'");
        }
        return it->second.value;
    }

    void check(const std::string& key, bool ok, const std::string& message) const {
        if (ok) return;
        const auto it = call_.args.find(key);
        const std::size_t at = it == call_.args.end() ? 0 : it->second.position;
        throw SpecParseError(text_, at, call_.name + ": " + message);
    }

private:
    std::size_t key_position(const std::string& key) const {
        const auto at = text_.find(key);
        return at == std::string_view::npos ? 0 : at;
    }

    std::string_view text_;
    const Call& call_;
};

}  // namespace

SpecParseError::SpecParseError(std::string_view input, std::size_t position,
                               const std::string& message)
    : std::invalid_argument(annotate(input, position, message)),
      position_(std::min(position, input.size())) {}

ChannelPtr parse_channel(std::string_view text) {
    const Call call = parse_call(text);
    if (call.name == "awgn") {
        Binder b(text, call, {"var"});
        const double var = b.get("var", 1.0);
        b.check("var", var > 0.0, "var must be positive");
        return std::make_shared<AwgnChannel>(var);
    }
    if (call.name == "probit") {
        Binder b(text, call, {"scale"});
        const double scale = b.get("scale", 1.0);
        b.check("scale", scale > 0.0, "scale must be positive");
        return std::make_shared<ProbitChannel>(scale);
    }
    if (call.name == "poisson") {
        Binder b(text, call, {});
        return std::make_shared<PoissonChannel>();
    }
    if (call.name == "logistic") {
        Binder b(text, call, {"scale"});
        const double scale = b.get("scale", 1.0);
        b.check("scale", scale > 0.0, "scale must be positive");
        return std::make_shared<LogisticChannel>(scale);
    }
    throw SpecParseError(text, text.find_first_not_of(" \t"), "unknown channel '" + call.name + "'");
}

PriorPtr parse_prior(std::string_view text) {
    const Call call = parse_call(text);
    if (call.name == "gaussian") {
        Binder b(text, call, {"mean", "var"});
        const double var = b.get("var", 1.0);
        b.check("var", var > 0.0, "var must be positive");
        return std::make_shared<GaussianPrior>(b.get("mean", 0.0), var);
    }
    if (call.name == "bg") {
        Binder b(text, call, {"rho", "mean", "var"});
        const double rho = b.require("rho");
        b.check("rho", rho >= 0.0 && rho <= 1.0, "rho out of [0,1]");
        const double var = b.get("var", 1.0);
        b.check("var", var > 0.0, "var must be positive");
        return std::make_shared<BernoulliGaussianPrior>(rho, b.get("mean", 0.0), var);
    }
    if (call.name == "laplace") {
        Binder b(text, call, {"lambda"});
        const double rate = b.get("lambda", 1.0);
        b.check("lambda", rate > 0.0, "lambda must be positive");
        return std::make_shared<LaplacePrior>(rate);
    }
    throw SpecParseError(text, text.find_first_not_of(" \t"), "unknown prior '" + call.name + "'");
}

}  // namespace glmamp
