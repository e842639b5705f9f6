#pragma once

#include <ostream>

/// Quick oracle checks; prints one PASS/FAIL line each and returns true if all pass.
bool run_selftest(std::ostream& out);
