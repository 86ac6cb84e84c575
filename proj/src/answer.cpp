#include "litesearch/answer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace litesearch {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Strips currency symbols and thousands separators, then trailing
// sentence punctuation. Multi-byte symbols are removed as substrings.
std::string strip_decorations(std::string_view s) {
  std::string out(trim(s));
  for (const char* sym : {"$", "€", "£", "¥"}) {
    for (size_t pos; (pos = out.find(sym)) != std::string::npos;) {
      out.erase(pos, std::string_view(sym).size());
    }
  }
  // Commas only act as thousands separators between digits; a comma in a
  // textual answer is preserved.
  std::string no_commas;
  no_commas.reserve(out.size());
  for (size_t i = 0; i < out.size(); ++i) {
    if (out[i] == ',' && i > 0 && i + 1 < out.size() &&
        std::isdigit(static_cast<unsigned char>(out[i - 1])) &&
        std::isdigit(static_cast<unsigned char>(out[i + 1]))) {
      continue;
    }
    no_commas.push_back(out[i]);
  }
  out = no_commas;
  while (!out.empty() && (out.back() == '.' || out.back() == ',' || is_space(out.back()))) {
    out.pop_back();
  }
  return std::string(trim(out));
}

std::optional<double> parse_full_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(begin, &end);
  if (end == begin || errno == ERANGE) return std::nullopt;
  while (*end != '\0') {
    if (!is_space(*end)) return std::nullopt;
    ++end;
  }
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

std::string canonical_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool in_space = false;
  for (char c : s) {
    if (is_space(c)) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out.push_back(' ');
    in_space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::optional<Answer> normalize_answer(std::string_view raw) {
  std::string stripped = strip_decorations(raw);
  if (stripped.empty()) return std::nullopt;
  Answer a;
  if (auto num = parse_full_number(stripped)) {
    a.is_number = true;
    a.number = *num;
    a.text = canonical_number(*num);
    return a;
  }
  a.is_number = false;
  a.text = collapse_whitespace(lower(stripped));
  if (a.text.empty()) return std::nullopt;
  return a;
}

bool answers_equal(const Answer& a, const Answer& b, double rel_tol) {
  if (a.is_number != b.is_number) return false;
  if (a.is_number) {
    if (a.number == b.number) return true;
    double scale = std::max(std::fabs(a.number), std::fabs(b.number));
    return std::fabs(a.number - b.number) <= rel_tol * scale;
  }
  return a.text == b.text;
}

std::optional<std::string> find_answer_span(std::string_view text) {
  const std::string haystack = lower(text);
  // Last occurrence wins: a step may restate intermediate "answers".
  static constexpr std::string_view kMarkers[] = {"answer is", "answer:"};
  size_t best = std::string::npos;
  size_t marker_len = 0;
  for (std::string_view m : kMarkers) {
    size_t pos = haystack.rfind(m);
    if (pos != std::string::npos && (best == std::string::npos || pos > best)) {
      best = pos;
      marker_len = m.size();
    }
  }
  if (best == std::string::npos) return std::nullopt;
  std::string_view tail = text.substr(best + marker_len);
  size_t eol = tail.find('\n');
  if (eol != std::string::npos) tail = tail.substr(0, eol);
  tail = trim(tail);
  if (tail.empty()) return std::nullopt;
  return std::string(tail);
}

bool has_answer_marker(std::string_view text) {
  return find_answer_span(text).has_value();
}

int whitespace_token_count(std::string_view text) {
  int count = 0;
  bool in_token = false;
  for (char c : text) {
    if (is_space(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
  }
  return count;
}

}  // namespace litesearch
