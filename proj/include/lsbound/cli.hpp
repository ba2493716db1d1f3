#pragma once

namespace lsbound {

// Entry point behind the lsbound binary. Exit codes: 0 success, 1 invalid
// config or input, 2 numerical/constraint error, 3 failed verify checks.
int cli_dispatch(int argc, const char* const* argv);

}  // namespace lsbound
