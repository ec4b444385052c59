#pragma once

#include "nlkg/harness.hpp"

namespace nlkg::detail {

// Reference constants at n = 4096, r_max = 100, validated against the
// closed forms and the dense eigensolver in the test suite.
inline const GoldenValues kGolden[] = {
    {3, 4096, 100.0, 1.100172503919882, 0.42725969411869974, 4.2736895368924195},
    {4, 4096, 100.0, 0.76555536932762869, 0.31218847471924921, 26.319191569202548},
    {5, 4096, 100.0, 0.61807094758272707, 0.25983234494641155, 168.87444383685087},
};

}  // namespace nlkg::detail
