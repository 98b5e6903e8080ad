#pragma once

namespace cosim {

/// Routes diagnostics to standard error. COSIM_LOG=debug|info selects the
/// level; otherwise only warnings and errors are shown.
void configure_logging();

}  // namespace cosim
