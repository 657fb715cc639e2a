#include "ckp/params.hpp"

#include <cctype>
#include <charconv>

#include "ckp/error.hpp"

namespace ckp {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

mpq_class parse_decimal(std::string_view text) {
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && (body.front() == '+' || body.front() == '-')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  long exponent = 0;
  if (const auto e = body.find_first_of("eE"); e != std::string_view::npos) {
    const std::string_view exp_text = body.substr(e + 1);
    const char* first = exp_text.data();
    const char* last = first + exp_text.size();
    if (!exp_text.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, exponent);
    if (ec != std::errc() || ptr != last) {
      throw ConfigError("malformed exponent in number '" + std::string(text) + "'");
    }
    body = body.substr(0, e);
  }
  std::string digits;
  long scale = 0;
  if (const auto dot = body.find('.'); dot != std::string_view::npos) {
    const auto int_part = body.substr(0, dot);
    const auto frac_part = body.substr(dot + 1);
    if ((!int_part.empty() && !all_digits(int_part)) ||
        (!frac_part.empty() && !all_digits(frac_part)) ||
        (int_part.empty() && frac_part.empty())) {
      throw ConfigError("malformed number '" + std::string(text) + "'");
    }
    digits = std::string(int_part) + std::string(frac_part);
    scale = static_cast<long>(frac_part.size());
  } else {
    if (!all_digits(body)) throw ConfigError("malformed number '" + std::string(text) + "'");
    digits = std::string(body);
  }
  mpz_class numerator(digits.empty() ? "0" : digits, 10);
  const long net = exponent - scale;
  mpz_class power;
  mpz_ui_pow_ui(power.get_mpz_t(), 10, static_cast<unsigned long>(net < 0 ? -net : net));
  mpq_class value = net >= 0 ? mpq_class(numerator * power) : mpq_class(numerator, power);
  value.canonicalize();
  return negative ? mpq_class(-value) : value;
}

}  // namespace

mpq_class parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw ConfigError("empty number");
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const mpq_class num = parse_decimal(text.substr(0, slash));
    const mpq_class den = parse_decimal(text.substr(slash + 1));
    if (sgn(den) == 0) throw ConfigError("zero denominator in '" + std::string(text) + "'");
    mpq_class out = num / den;
    out.canonicalize();
    return out;
  }
  return parse_decimal(text);
}

Probability::Probability(mpq_class value) : exact_(std::move(value)) {
  exact_.canonicalize();
  if (sgn(exact_) < 0 || exact_ > 1) {
    throw ConfigError("probability " + exact_.get_str() + " outside [0, 1]");
  }
  approx_ = exact_.get_d();
}

Probability Probability::parse(std::string_view text) { return Probability(parse_rational(text)); }

CheckDepth CheckDepth::bounded(std::uint32_t k) {
  if (k == 0) throw ConfigError("check depth k must be at least 1");
  return CheckDepth(k);
}

CheckDepth CheckDepth::parse(std::string_view text) {
  if (text == "inf" || text == "unbounded" || text == "infinity") return unbounded();
  std::uint32_t k = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), k);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("check depth must be a positive integer or 'inf', got '" +
                      std::string(text) + "'");
  }
  return bounded(k);
}

std::uint32_t CheckDepth::value() const {
  if (!k_) throw Error("check depth is unbounded");
  return *k_;
}

std::string CheckDepth::str() const { return k_ ? std::to_string(*k_) : std::string("inf"); }

mpq_class elimination_margin(const ModelParams& params) {
  const mpq_class& eps = params.epsilon.exact();
  const mpq_class& p = params.p.exact();
  mpq_class best = -p / 2 + 3 * (1 - p);
  if (params.k.is_bounded() || sgn(p) == 0) {
    const mpq_class deep = params.k.is_bounded() ? mpq_class(-mpq_class(2 * params.k.value() - 1) * p / 2 + 3)
                                                 : mpq_class(3);
    if (deep > best) best = deep;
  }
  return mpq_class((1 - eps) * best + 2 * eps * (1 - p));
}

mpq_class survival_margin(const ModelParams& params) {
  const mpq_class& p = params.p.exact();
  return mpq_class((1 - p) / 2 - 3 * (1 - params.epsilon.exact()) * p);
}

bool combined_admissible(const Probability& p, const CheckDepth& k) {
  if (!k.is_bounded()) return false;
  const mpq_class low(12, 2 * k.value() - 1);
  return p.exact() >= low && p.exact() <= mpq_class(1, 6);
}

}  // namespace ckp
