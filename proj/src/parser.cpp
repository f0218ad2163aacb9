#include "nonholo/parser.hpp"

#include "nonholo/errors.hpp"

#include <cctype>

namespace nonholo {

namespace {

class Parser {
public:
    Parser(std::string_view text, SymbolTablePtr context)
        : text_(text), context_(std::move(context)) {}

    RationalExpr run() {
        RationalExpr e = expression();
        skip_ws();
        if (pos_ != text_.size())
            throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view text_;
    SymbolTablePtr context_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    RationalExpr expression() {
        RationalExpr acc = term();
        for (;;) {
            if (eat('+'))
                acc = acc + term();
            else if (eat('-'))
                acc = acc - term();
            else
                return acc;
        }
    }

    RationalExpr term() {
        RationalExpr acc = factor();
        for (;;) {
            skip_ws();
            std::size_t op_pos = pos_;
            if (eat('*')) {
                acc = acc * factor();
            } else if (eat('/')) {
                RationalExpr d = factor();
                if (d.num().is_zero())
                    throw ParseError("division by an expression that expands to the zero polynomial",
                                     op_pos);
                acc = acc / d;
            } else {
                return acc;
            }
        }
    }

    RationalExpr factor() {
        bool negative = false;
        for (;;) {
            if (eat('-'))
                negative = !negative;
            else if (eat('+'))
                ;
            else
                break;
        }
        RationalExpr p = power();
        return negative ? -p : p;
    }

    RationalExpr power() {
        RationalExpr base = atom();
        skip_ws();
        if (!eat('^'))
            return base;
        std::size_t exp_pos = pos_;
        unsigned long e = natural(exp_pos);
        if (e > kMaxExponent)
            throw ParseError("exponent exceeds the 2^16 bound", exp_pos);
        // Exponentiation at the rational level: num^e / den^e.
        return RationalExpr(base.num().pow(std::uint32_t(e)),
                            base.den().pow(std::uint32_t(e)));
    }

    RationalExpr atom() {
        skip_ws();
        if (pos_ >= text_.size())
            throw ParseError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            RationalExpr e = expression();
            if (!eat(')'))
                throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t p = pos_;
            unsigned long v = natural(p);
            return RationalExpr::constant(context_, mpq_class(static_cast<unsigned long>(v)));
        }
        if (std::isalpha(static_cast<unsigned char>(c)))
            return symbol();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    unsigned long natural(std::size_t& at) {
        skip_ws();
        at = pos_;
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
            throw ParseError("expected an integer", pos_);
        unsigned long v = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            v = v * 10 + static_cast<unsigned long>(text_[pos_] - '0');
            if (v > 1000000000000000ul)
                throw ParseError("integer literal too large", at);
            ++pos_;
        }
        return v;
    }

    RationalExpr symbol() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        if (!context_->find(name))
            throw UndeclaredSymbolError(name, start);
        return RationalExpr::variable(context_, name);
    }
};

} // namespace

RationalExpr parse_expr(std::string_view text, const SymbolTablePtr& context) {
    return Parser(text, context).run();
}

} // namespace nonholo
