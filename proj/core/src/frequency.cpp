#include "mementomap/frequency.hpp"

#include <charconv>

#include "mementomap/error.hpp"

namespace mementomap {

namespace {

char suffix(Modifier m) {
  switch (m) {
    case Modifier::AtLeast: return '+';
    case Modifier::AtMost: return '-';
    case Modifier::Approx: return '~';
    case Modifier::Exact: break;
  }
  return '\0';
}

[[noreturn]] void bad(std::string_view text) {
  throw Error(ErrorKind::MalformedFrequency, "bad frequency '" + std::string(text) + "'");
}

// Parses INT[mod] from the front of `s`; advances `s`.
Count parse_count(std::string_view& s, std::string_view whole) {
  Count c;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), c.value);
  if (ec != std::errc{} || ptr == s.data()) bad(whole);
  s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
  if (!s.empty()) {
    switch (s.front()) {
      case '+': c.modifier = Modifier::AtLeast; s.remove_prefix(1); break;
      case '-': c.modifier = Modifier::AtMost; s.remove_prefix(1); break;
      case '~': c.modifier = Modifier::Approx; s.remove_prefix(1); break;
      default: break;
    }
  }
  return c;
}

std::optional<Count> sum_for_rollup(const std::optional<Count>& a,
                                    const std::optional<Count>& b) {
  if (!a && !b) return std::nullopt;
  const bool exact = a && b && a->modifier == Modifier::Exact &&
                     b->modifier == Modifier::Exact;
  const std::uint64_t total = (a ? a->value : 0) + (b ? b->value : 0);
  return Count{total, exact ? Modifier::Exact : Modifier::Approx};
}

Modifier merge_modifier(Modifier a, Modifier b) {
  if (a == Modifier::Approx || b == Modifier::Approx) return Modifier::Approx;
  if (a == Modifier::Exact) return b;
  if (b == Modifier::Exact) return a;
  return a == b ? a : Modifier::Approx;
}

std::optional<Count> merge_side(const std::optional<Count>& a,
                                const std::optional<Count>& b) {
  if (!a && !b) return std::nullopt;
  if (!a || !b) {
    Count c = a ? *a : *b;
    c.modifier = merge_modifier(c.modifier, Modifier::AtLeast);
    return c;
  }
  return Count{a->value + b->value, merge_modifier(a->modifier, b->modifier)};
}

}  // namespace

FrequencyValue parse_frequency(std::string_view text) {
  std::string_view s = text;
  FrequencyValue f;
  if (s.empty()) bad(text);
  if (s.front() != '/') f.urim = parse_count(s, text);
  if (!s.empty()) {
    if (s.front() != '/') bad(text);
    s.remove_prefix(1);
    f.urir = parse_count(s, text);
  }
  if (!s.empty()) bad(text);
  return f;
}

void append_frequency(std::string& out, const FrequencyValue& f) {
  char buf[24];
  auto put = [&](const Count& c) {
    const auto res = std::to_chars(buf, buf + sizeof buf, c.value);
    out.append(buf, res.ptr);
    if (const char s = suffix(c.modifier)) out.push_back(s);
  };
  if (f.urim) put(*f.urim);
  if (f.urir) {
    out.push_back('/');
    put(*f.urir);
  }
}

std::string serialize_frequency(const FrequencyValue& f) {
  std::string out;
  append_frequency(out, f);
  return out;
}

FrequencyValue rollup_sum(const FrequencyValue& a, const FrequencyValue& b) {
  return FrequencyValue{sum_for_rollup(a.urim, b.urim), sum_for_rollup(a.urir, b.urir)};
}

FrequencyValue merge_duplicate(const FrequencyValue& a, const FrequencyValue& b) {
  return FrequencyValue{merge_side(a.urim, b.urim), merge_side(a.urir, b.urir)};
}

bool is_blacklist(const FrequencyValue& f) noexcept {
  const auto& side = f.urim ? f.urim : f.urir;
  return side && side->value == 0 && side->modifier != Modifier::AtLeast;
}

std::uint64_t primary_count(const FrequencyValue& f) noexcept {
  if (f.urim) return f.urim->value;
  if (f.urir) return f.urir->value;
  return 0;
}

}  // namespace mementomap
