#include "cumulants/products.hpp"

#include <cctype>
#include <stdexcept>

namespace cumulants {
namespace {

const std::string& name_of(Label label, const std::vector<std::string>& names) {
  static const std::string unknown = "?";
  return label >= 0 && static_cast<std::size_t>(label) < names.size() ? names[static_cast<std::size_t>(label)] : unknown;
}

// "x^2z" style monomial for a sorted block.
std::string monomial(const Block& block, const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < block.size();) {
    std::size_t j = i;
    while (j < block.size() && block[j] == block[i]) ++j;
    out += name_of(block[i], names);
    if (j - i > 1) out += "^" + std::to_string(j - i);
    i = j;
  }
  return out;
}

}  // namespace

std::string format_moment_product(const MomentProduct& p, const std::vector<std::string>& names) {
  if (p.empty()) return "1";
  std::string out;
  for (const auto& b : p.blocks()) out += "<" + monomial(b, names) + ">";
  return out;
}

std::string format_mean_product(const MeanProductTerm& p, const std::vector<std::string>& names) {
  if (p.empty()) return "1";
  std::string out;
  const auto& blocks = p.blocks();
  for (std::size_t k = 0; k < blocks.size();) {
    std::size_t same = k;
    while (same < blocks.size() && blocks[same] == blocks[k]) ++same;
    if (!out.empty()) out += " ";
    out += "mean(" + monomial(blocks[k], names) + ")";
    if (same - k > 1) out += "^" + std::to_string(same - k);
    k = same;
  }
  return out;
}

std::string format_cumulant_product(const CumulantProduct& p, const std::vector<std::string>& names) {
  if (p.empty()) return "1";
  std::string out;
  const auto& blocks = p.blocks();
  for (std::size_t k = 0; k < blocks.size();) {
    std::size_t same = k;
    while (same < blocks.size() && blocks[same] == blocks[k]) ++same;
    const Block& b = blocks[k];
    out += "C" + std::to_string(b.size()) + "(";
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (i) out += ",";
      out += name_of(b[i], names);
    }
    out += ")";
    if (same - k > 1) out += "^" + std::to_string(same - k);
    k = same;
  }
  return out;
}

}  // namespace cumulants

namespace cumulants {
namespace {

enum class FactorKind { kMean, kCumulant };

class ExprReader {
 public:
  ExprReader(std::string_view text, const std::vector<std::string>& names, FactorKind kind)
      : text_(text), names_(names), kind_(kind) {}

  template <class Tag>
  LinearCombination<Tag, RationalFn> read() {
    LinearCombination<Tag, RationalFn> out;
    skip_space();
    if (pos_ == text_.size()) fail("empty expression");
    while (pos_ < text_.size()) {
      RationalFn sign(1);
      if (peek() == '+' || peek() == '-') {
        if (get() == '-') sign = RationalFn(-1);
        skip_space();
      }
      const std::size_t coeff_begin = pos_;
      int depth = 0;
      while (pos_ < text_.size() && (depth > 0 || !at_factor())) {
        if (peek() == '(') ++depth;
        if (peek() == ')') --depth;
        ++pos_;
      }
      std::string_view coeff_text = text_.substr(coeff_begin, pos_ - coeff_begin);
      while (!coeff_text.empty() && (coeff_text.back() == ' ' || coeff_text.back() == '*')) coeff_text.remove_suffix(1);
      const RationalFn coeff = coeff_text.empty() ? RationalFn(1) : parse_rational(coeff_text);
      std::vector<Block> blocks;
      if (!at_factor()) fail("term without a factor");
      while (at_factor()) {
        const Block b = read_factor();
        const int power = read_power();
        for (int i = 0; i < power; ++i) blocks.push_back(b);
        skip_space();
        if (peek() == '*') {
          ++pos_;
          skip_space();
        }
      }
      out.add(Product<Tag>(std::move(blocks)), sign * coeff);
      skip_space();
      if (pos_ < text_.size() && peek() != '+' && peek() != '-') fail("unexpected character");
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument(what + " at offset " + std::to_string(pos_) + " in '" + std::string(text_) + "'");
  }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  char get() { return text_[pos_++]; }
  void skip_space() {
    while (pos_ < text_.size() && text_[pos_] == ' ') ++pos_;
  }
  bool at_factor() const {
    const auto rest = text_.substr(pos_);
    if (kind_ == FactorKind::kMean) return rest.starts_with("mean(");
    return rest.size() > 1 && rest[0] == 'C' && std::isdigit(static_cast<unsigned char>(rest[1]));
  }

  Label read_label() {
    std::size_t best = 0;
    Label label = -1;
    for (std::size_t i = 0; i < names_.size(); ++i) {
      const auto& n = names_[i];
      if (n.size() > best && text_.substr(pos_).starts_with(n)) {
        best = n.size();
        label = static_cast<Label>(i);
      }
    }
    if (label < 0) fail("unknown variable");
    pos_ += best;
    return label;
  }

  int read_int() {
    const std::size_t begin = pos_;
    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (begin == pos_) fail("expected an integer");
    return std::stoi(std::string(text_.substr(begin, pos_ - begin)));
  }

  int read_power() {
    if (peek() != '^') return 1;
    ++pos_;
    return read_int();
  }

  Block read_factor() {
    Block b;
    if (kind_ == FactorKind::kMean) {
      pos_ += 5;
      while (peek() != ')') {
        if (pos_ >= text_.size()) fail("unterminated mean(");
        const Label l = read_label();
        const int k = read_power();
        b.insert(b.end(), static_cast<std::size_t>(k), l);
      }
      ++pos_;
    } else {
      ++pos_;
      const int order = read_int();
      if (get() != '(') fail("expected '('");
      while (true) {
        skip_space();
        b.push_back(read_label());
        skip_space();
        const char c = pos_ < text_.size() ? get() : '\0';
        if (c == ')') break;
        if (c != ',') fail("expected ',' or ')'");
      }
      if (static_cast<int>(b.size()) != order) fail("cumulant order does not match its argument count");
    }
    return make_block(std::move(b));
  }

  std::string_view text_;
  const std::vector<std::string>& names_;
  FactorKind kind_;
  std::size_t pos_ = 0;
};

}  // namespace

LinearCombination<MeanTag, RationalFn> parse_mean_expr(std::string_view text, const std::vector<std::string>& names) {
  return ExprReader(text, names, FactorKind::kMean).read<MeanTag>();
}

LinearCombination<CumulantTag, RationalFn> parse_cumulant_expr(std::string_view text,
                                                               const std::vector<std::string>& names) {
  return ExprReader(text, names, FactorKind::kCumulant).read<CumulantTag>();
}

}  // namespace cumulants
