#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace litesearch {

/**
 * A normalized final answer.
 *
 * Numeric answers compare at relative tolerance; everything else compares
 * case-insensitively after whitespace collapsing. `text` is the canonical
 * form and doubles as the vote-tally key.
 */
struct Answer {
  bool is_number = false;
  double number = 0.0;
  std::string text;

  bool operator==(const Answer& other) const { return text == other.text; }
};

/// Normalizes a raw answer string: strips currency symbols and thousands
/// separators, canonicalizes numbers (drops trailing ".0"), lowercases and
/// collapses whitespace for non-numeric answers. Returns nullopt for empty
/// input.
std::optional<Answer> normalize_answer(std::string_view raw);

/// Equality with numeric relative tolerance (default 1e-6).
bool answers_equal(const Answer& a, const Answer& b, double rel_tol = 1e-6);

/// Finds the final-answer marker ("The answer is ..." and variants) in a
/// step text and returns the span after it, or nullopt if no marker parses.
std::optional<std::string> find_answer_span(std::string_view text);

/// True if the text carries a final-answer marker.
bool has_answer_marker(std::string_view text);

/// Whitespace-split token count (the synthetic backend's cost model).
int whitespace_token_count(std::string_view text);

}  // namespace litesearch
