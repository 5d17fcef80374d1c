#pragma once

namespace fabricnet {

// Kernel execution selector. Parallel variants use OpenMP over independent
// output slots and produce bit-identical results to the serial reference,
// which the tests assert. Serial paths stay as the reference implementation.
enum class Exec { serial, parallel };

}  // namespace fabricnet
