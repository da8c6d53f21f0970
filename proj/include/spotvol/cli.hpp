#pragma once

namespace spotvol {

// Command-line front end (simulate | estimate | experiment | gridsearch |
// validate-kernel | oracle). Returns 0 on success, 2 on configuration or
// usage errors, 3 when an --assert expression fails.
int cli_main(int argc, const char* const* argv);

}  // namespace spotvol
