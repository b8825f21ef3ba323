#pragma once

// Everything except the harness, which pulls in yaml-cpp and httplib.
#include "metatrial/core/error.hpp"
#include "metatrial/core/parallel.hpp"
#include "metatrial/core/rng.hpp"
#include "metatrial/credit/advantages.hpp"
#include "metatrial/credit/returns.hpp"
#include "metatrial/env/environment.hpp"
#include "metatrial/env/minesweeper.hpp"
#include "metatrial/env/render.hpp"
#include "metatrial/env/sokoban.hpp"
#include "metatrial/env/task_sets.hpp"
#include "metatrial/env/types.hpp"
#include "metatrial/eval/diversity.hpp"
#include "metatrial/eval/pass_at_k.hpp"
#include "metatrial/eval/sweep.hpp"
#include "metatrial/policy/backend.hpp"
#include "metatrial/policy/features.hpp"
#include "metatrial/policy/linear_policy.hpp"
#include "metatrial/policy/memory.hpp"
#include "metatrial/policy/prompts.hpp"
#include "metatrial/policy/response_parser.hpp"
#include "metatrial/policy/text_policy.hpp"
#include "metatrial/rollout/rollout.hpp"
#include "metatrial/rollout/trial.hpp"
#include "metatrial/trainer/config.hpp"
#include "metatrial/trainer/experience.hpp"
#include "metatrial/trainer/trainer.hpp"
