#pragma once

#include <map>
#include <string>
#include <string_view>

#include "metatrial/core/error.hpp"
#include "metatrial/env/render.hpp"
#include "metatrial/env/types.hpp"
#include "metatrial/policy/backend.hpp"
#include "metatrial/policy/memory.hpp"

namespace metatrial {

enum class TemplateId { SokobanStandard, SokobanReflection, MinesweeperStandard, MinesweeperReflection };
enum class ExpectedTag { Action, Remark };

inline std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::SokobanStandard: return "sokoban_standard";
    case TemplateId::SokobanReflection: return "sokoban_reflection";
    case TemplateId::MinesweeperStandard: return "minesweeper_standard";
    case TemplateId::MinesweeperReflection: return "minesweeper_reflection";
  }
  return "";
}

inline TemplateId parse_template_id(std::string_view s) {
  for (auto id : {TemplateId::SokobanStandard, TemplateId::SokobanReflection, TemplateId::MinesweeperStandard,
                  TemplateId::MinesweeperReflection})
    if (to_string(id) == s) return id;
  throw std::invalid_argument("unknown template '" + std::string(s) + "'");
}

namespace templates {

inline constexpr std::string_view kSokobanSymbols = R"TPL(# Symbols and Their Meaning
- Walls (#): These block movement. You can't move through or push anything into walls.
- Floor (_): Open spaces where you can walk and move boxes.
- Targets (O): The spots where boxes need to go.
- Boxes (X): These are what you need to push onto the targets.
- Player (P): That's you! You'll move around the grid to push boxes.
- Box on Target (√): A box successfully placed on a target.
- Player on Target (S): You standing on a target.
)TPL";

inline constexpr std::string_view kSokobanRules = R"TPL(# Rules
Your admissible actions are ["up", "down", "left", "right"].
You can only push one box at a time. You can't pull boxes, so plan ahead to avoid getting stuck.
You can't walk through or push boxes into walls (#) or other boxes.
To avoid traps, do not push boxes into corners or against walls where they can't be moved again.
)TPL";

inline const std::string kSokobanStandard = std::string(R"TPL(You are an expert agent operating in the Sokoban environment.

)TPL") + std::string(kSokobanSymbols) + R"TPL(
# Goal
Your goal is to push all the boxes (X) onto the target spots (O). Once all boxes are on the targets, you win!

)TPL" + std::string(kSokobanRules) + R"TPL({example}

# Observations
The initial state of the game is:
{initial_board}
{past_experience_reflection}
You have already taken the following actions:
{history_actions}
Your current observation is:
{current_board}
Now it's your turn to make moves (choose the next {num_actions_per_turn} actions).
- Your response first be step-by-step reasoning about the current situation — observe the positions of boxes and targets, plan a path to push a box toward a target, and avoid traps like corners or walls.
- Then choose {num_actions_per_turn} admissible actions and present them within <action> </action> tags (separated by comma).)TPL";

inline constexpr std::string_view kReflectionClosing = R"TPL(The task is NOT successfully completed.
Now it's your turn to reflect on the past experience and come up with a new plan of action.
- Your response should first be step-by-step reasoning about the strategy and path you took to attempt to complete the task. Identify where things went wrong or could be better.
- Then devise a concise, new plan of action that accounts for your mistake with reference to specific actions that you should have taken.
- Finally, end the response with your reflection and improved plan inside <remark> </remark> tags, to guide the next trial.)TPL";

inline const std::string kSokobanReflection = std::string(R"TPL(You are an expert agent operating in the Sokoban environment.

)TPL") + std::string(kSokobanSymbols) + R"TPL(
# Your Goal
Your goal is to push all the boxes (X) onto the target spots (O). Once all boxes are on the targets, you win!

)TPL" + std::string(kSokobanRules) + R"TPL(
# Your Task
You will be given the history of a past experience.
Your job is to **reflect on the past sequence**, identify any **mistakes or inefficiencies**, and then devise a **concise, improved plan** starting from the original initial state.

# Past Experience
The initial state of the game is:
{initial_board}

You have taken the following actions:
{history_actions}
The final state is:
{final_board}
)TPL" + std::string(kReflectionClosing);

inline constexpr std::string_view kMinesweeperRules = R"TPL(
# Cell States
- Unopened cells (?): cells that are yet to be revealed and may contain a mine.
- Blank cells (.): opened and non-mine cells, and they have no neighboring mines
- Numbered cells (1-8): opened and non-mine cells, and the number indicates how many mines are in the eight neighboring cells, including those diagonally adjacent. For example, a cell with a '8' means all its neighboring cells contain mines.
- Mine cells (*): opened cells that contain a mine.

# Your Goal
Your goal is to clear the board by revealing all the cells that don't contain mines, without detonating any of the hidden mines scattered throughout the board.
Use clues about the number of neighboring mines in each field to reason about the position of mines and non-mine cells.

# Reveal Rules
Your admissible action is to choose ONE unopened cell (?) to reveal per turn. The outcome depends on the content of that cell:
- Blank cell (.): That cell is revealed, and all contiguous blank cells plus their bordering numbered cells are automatically revealed (auto-cascade).
- Numbered cell (1–8): Only that single cell is revealed, showing the count of neighboring mines.
- Mine (*): The game ends immediately in a loss.
)TPL";

inline const std::string kMinesweeperStandard = std::string(R"TPL(You are an expert agent operating in the Minesweeper game.
You will be given a two dimensional {board_size} by {board_size} board, with {n_mines} hidden mines.
The rows and columns are indexed from 1 to {board_size}.
)TPL") + std::string(kMinesweeperRules) + R"TPL(# Observation
The initial state of the game is:
{initial_board}
{past_experience_reflection}
You have already chosen the following cells to reveal: {history_actions}
Your current observation is:
{current_board}
Now it's your turn to make a move.
- Your should first reason step-by-step about the current situation — observe the status of the board, inferring the states of unopened cells (?).
- Then choose ONE unopened cell (?) to reveal. Put the index of cell in the format of "(row, col)" within the <action> </action> tag.)TPL";

inline const std::string kMinesweeperReflection = std::string(R"TPL(You are an expert agent operating in the Minesweeper game.
You will be given a two dimensional {board_size} by {board_size} board, with {n_mines} hidden mines.
The rows and columns are indexed from 1 to {board_size}
)TPL") + std::string(kMinesweeperRules) + R"TPL(
# Your Task
You will be given the history of a past experience.
Your job now is to **reflect on the past experience**, identify any **mistakes or inefficiencies**, and then devise a **concise, improved plan** for your next try starting from the original initial state.
# Past Experience
The initial state of the game is:
{initial_board}
You have chosen the following cells to reveal:
{history_actions}
The final state is:
{final_board}
)TPL" + std::string(kReflectionClosing);

}  // namespace templates

inline const std::string& template_text(TemplateId id) {
  switch (id) {
    case TemplateId::SokobanStandard: return templates::kSokobanStandard;
    case TemplateId::SokobanReflection: return templates::kSokobanReflection;
    case TemplateId::MinesweeperStandard: return templates::kMinesweeperStandard;
    case TemplateId::MinesweeperReflection: return templates::kMinesweeperReflection;
  }
  throw std::invalid_argument("unknown template");
}

/// Replaces every {name} (lowercase letters and underscores) with its value.
/// Values are inserted verbatim and never re-scanned.
inline std::string substitute(std::string_view tpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tpl.size() + 256);
  std::size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] == '{') {
      std::size_t j = i + 1;
      while (j < tpl.size() && ((tpl[j] >= 'a' && tpl[j] <= 'z') || tpl[j] == '_')) ++j;
      if (j < tpl.size() && tpl[j] == '}' && j > i + 1) {
        const std::string name(tpl.substr(i + 1, j - i - 1));
        const auto it = values.find(name);
        if (it == values.end()) throw TemplateError(name);
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out += tpl[i++];
  }
  return out;
}

struct PromptBundle {
  std::string system_text;  // the role line
  std::string user_text;    // everything after it
  ExpectedTag expected_tag = ExpectedTag::Action;

  std::string full_text() const { return system_text + "\n" + user_text; }
  friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

inline PromptBundle render_prompt(TemplateId id, const std::map<std::string, std::string>& values) {
  const std::string text = substitute(template_text(id), values);
  const auto cut = text.find('\n');
  PromptBundle b;
  b.system_text = text.substr(0, cut);
  b.user_text = cut == std::string::npos ? std::string() : text.substr(cut + 1);
  b.expected_tag = (id == TemplateId::SokobanReflection || id == TemplateId::MinesweeperReflection)
                       ? ExpectedTag::Remark
                       : ExpectedTag::Action;
  return b;
}

struct PromptOptions {
  int num_actions_per_turn = 1;
  std::string sokoban_example;  // fills {example}
};

inline std::string join_actions(EnvKind kind, int board_size, std::span<const Action> actions) {
  if (actions.empty()) return "None";
  std::string out;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i > 0) out += ", ";
    out += action_to_string(kind, board_size, actions[i]);
  }
  return out;
}

/// Text for {past_experience_reflection}: empty before the first reflection
/// or summary exists, otherwise one block per earlier attempt with whatever
/// the memory mode kept.
inline std::string render_past_experience(const MemoryState& memory, EnvKind kind, int board_size) {
  if (memory.mode == MemoryMode::None || memory.empty()) return "";
  std::string out = "# Past Experience Reflection";
  for (const auto& s : memory.episode_summaries) {
    out += "\nAttempt " + std::to_string(s.episode + 1) + (s.success ? " (successful):" : " (not successful):");
    if (!s.actions.empty()) out += "\nActions taken: " + join_actions(kind, board_size, s.actions);
    for (const auto& r : memory.reflections)
      if (r.episode == s.episode && !r.text.empty()) out += "\nReflection: " + r.text;
  }
  return out;
}

inline PromptBundle render_action_prompt(const TurnContext& ctx, const PromptOptions& options = {}) {
  const int n = ctx.task.board_size;
  const EnvKind kind = ctx.task.env_kind;
  std::map<std::string, std::string> v{
      {"board_size", std::to_string(n)},
      {"n_mines", std::to_string(ctx.task.difficulty)},
      {"initial_board", ctx.initial.text()},
      {"current_board", ctx.current.text()},
      {"history_actions", join_actions(kind, n, ctx.history)},
      {"past_experience_reflection", render_past_experience(ctx.memory, kind, n)},
      {"num_actions_per_turn", std::to_string(options.num_actions_per_turn)},
      {"example", options.sokoban_example},
  };
  return render_prompt(kind == EnvKind::Sokoban ? TemplateId::SokobanStandard : TemplateId::MinesweeperStandard, v);
}

inline PromptBundle render_reflection_prompt(const ReflectContext& ctx) {
  const int n = ctx.task.board_size;
  const EnvKind kind = ctx.task.env_kind;
  std::map<std::string, std::string> v{
      {"board_size", std::to_string(n)},
      {"n_mines", std::to_string(ctx.task.difficulty)},
      {"initial_board", ctx.initial.text()},
      {"final_board", ctx.final_observation.text()},
      {"history_actions", join_actions(kind, n, ctx.actions)},
  };
  return render_prompt(kind == EnvKind::Sokoban ? TemplateId::SokobanReflection : TemplateId::MinesweeperReflection,
                       v);
}

}  // namespace metatrial
