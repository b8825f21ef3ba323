#pragma once

#include <algorithm>
#include <cctype>
#include <regex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "metatrial/core/error.hpp"
#include "metatrial/env/types.hpp"
#include "metatrial/policy/prompts.hpp"

namespace metatrial {

// Contents of the last complete <tag>...</tag> block, verbatim.
inline std::string extract_last_block(std::string_view text, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  const auto start = text.rfind(open);
  if (start == std::string_view::npos) throw MalformedResponse("missing " + open + " block", std::string(text));
  const auto body = start + open.size();
  const auto end = text.find(close, body);
  if (end == std::string_view::npos) throw MalformedResponse("unterminated " + open + " block", std::string(text));
  return std::string(text.substr(body, end - body));
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace detail

// A direction, or a 1-based (row, col) cell.
using ParsedAction = std::variant<Direction, Cell>;

struct ParsedResponse {
  std::vector<ParsedAction> actions;
  std::string remark;
};

inline std::vector<ParsedAction> parse_sokoban_actions(const std::string& block, std::string_view full_text) {
  std::vector<ParsedAction> out;
  std::size_t pos = 0;
  while (pos <= block.size()) {
    const auto comma = block.find(',', pos);
    std::string token = detail::trim(std::string_view(block).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    token.erase(std::remove_if(token.begin(), token.end(), [](char c) { return c == '"' || c == '\''; }), token.end());
    std::transform(token.begin(), token.end(), token.begin(), [](unsigned char c) { return std::tolower(c); });
    const auto it = std::find(std::begin(kDirectionNames), std::end(kDirectionNames), token);
    if (it == std::end(kDirectionNames))
      throw MalformedResponse("unrecognized move '" + token + "'", std::string(full_text));
    out.emplace_back(static_cast<Direction>(it - std::begin(kDirectionNames)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline std::vector<ParsedAction> parse_minesweeper_actions(const std::string& block, std::string_view full_text) {
  static const std::regex pair(R"(\(\s*(\d+)\s*,\s*(\d+)\s*\))");
  std::vector<ParsedAction> out;
  std::string rest;
  auto last = block.cbegin();
  for (std::sregex_iterator it(block.begin(), block.end(), pair), end; it != end; ++it) {
    rest.append(last, (*it)[0].first);
    last = (*it)[0].second;
    out.emplace_back(Cell{std::stoi((*it)[1]), std::stoi((*it)[2])});
  }
  rest.append(last, block.cend());
  // Only separators may remain between the pairs.
  if (rest.find_first_not_of(" \t\r\n,;") != std::string::npos || out.empty())
    throw MalformedResponse("unparseable cell '" + detail::trim(block) + "'", std::string(full_text));
  return out;
}

/// Action mode: the last <action> block split into moves or (row, col)
/// cells. Remark mode: the last <remark> block verbatim.
inline ParsedResponse parse_tagged_response(std::string_view text, ExpectedTag tag, EnvKind kind) {
  ParsedResponse r;
  if (tag == ExpectedTag::Remark) {
    r.remark = extract_last_block(text, "remark");
    if (detail::trim(r.remark).empty()) throw MalformedResponse("empty <remark> block", std::string(text));
    return r;
  }
  const std::string block = extract_last_block(text, "action");
  if (detail::trim(block).empty()) throw MalformedResponse("empty <action> block", std::string(text));
  r.actions = kind == EnvKind::Sokoban ? parse_sokoban_actions(block, text) : parse_minesweeper_actions(block, text);
  return r;
}

}  // namespace metatrial
