#pragma once

#include "acp/aip/task.hpp"
#include "acp/core/envelope.hpp"
#include "acp/core/report.hpp"

#include <span>

namespace acp::aip {

// Replays the AIP messages of a transcript against the interaction rules:
//   task_request first; invites before any assignment; an answer only to an
//   open invitation; assignments only to joined members once every
//   invitation is answered; subtask_start only once every assignment is
//   accepted and the sub-task's dependencies reported success; negotiation
//   only on started sub-tasks and open threads; one user_prompt outstanding
//   at a time and the leader's answer in an escalated thread only after the
//   user replied; a result only with no thread open; task_report last.
// Non-AIP envelopes are skipped. Violations are reported at "messages[i]".
core::ValidationReport check_message_order(std::span<const core::Envelope> messages);

// Every transition must be an edge of the task graph, chained from the
// creation entry.
core::ValidationReport check_transitions(std::span<const Transition> transitions);

}  // namespace acp::aip
