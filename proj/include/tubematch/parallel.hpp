#pragma once

#include <optional>
#include <string>

namespace tubematch {

// Thread cap applied to every OpenMP region in the library. 0 means use the
// OpenMP default. The CLI seeds this from TUBEMATCH_THREADS at startup.
void set_thread_cap(int cap);
int thread_cap();

// num_threads value for parallel regions: the cap when set, otherwise the
// OpenMP maximum (1 when built without OpenMP).
int resolved_threads();

// Parses a TUBEMATCH_THREADS value; nullopt when it is not a base-10
// non-negative integer.
std::optional<int> parse_thread_cap(const std::string& text);

}  // namespace tubematch
