#pragma once

#include <string>
#include <vector>

namespace fdl {

struct CheckRow {
    std::string name;
    bool pass = false;
    std::string detail;
};

// The built-in oracle/invariant suite behind `fdl check`. When
// inject_dct_error is set, one fast-DCT coefficient is perturbed before the
// definitional comparison so the failure path (exit 3, row naming the DCT
// oracle) can be exercised against a healthy build.
std::vector<CheckRow> run_self_checks(bool inject_dct_error);

std::string format_check_table(const std::vector<CheckRow>& rows);

}  // namespace fdl
