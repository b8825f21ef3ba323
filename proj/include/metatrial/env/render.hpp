#pragma once

#include <string>

#include "metatrial/env/minesweeper.hpp"
#include "metatrial/env/sokoban.hpp"
#include "metatrial/env/types.hpp"

namespace metatrial {

// Sokoban: "<row>: # _ O ..." with 0-based rows and a check mark for a box
// on a target. MineSweeper: "Row <i>: ? . 1 ..." with 1-based rows.
inline std::string render_cells(EnvKind kind, int board_size, const std::string& cells) {
  std::string out;
  for (int r = 0; r < board_size; ++r) {
    if (r > 0) out += '\n';
    out += kind == EnvKind::Sokoban ? std::to_string(r) + ":" : "Row " + std::to_string(r + 1) + ":";
    for (int c = 0; c < board_size; ++c) {
      const char sym = cells[static_cast<std::size_t>(r * board_size + c)];
      out += ' ';
      if (kind == EnvKind::Sokoban && sym == 'V')
        out += "√";
      else
        out += sym;
    }
  }
  return out;
}

inline std::string Observation::text() const { return render_cells(kind, board_size, cells); }

inline std::string render_text(const SokobanState& s) {
  return render_cells(EnvKind::Sokoban, s.size, sokoban_cells(s));
}

inline std::string render_text(const MinesweeperState& s) {
  return render_cells(EnvKind::MineSweeper, s.size, minesweeper_cells(s));
}

}  // namespace metatrial
