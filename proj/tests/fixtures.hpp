#pragma once

#include <string>

#include "ctlive/ir_text.hpp"

namespace fixtures {

// The pipelined multiplier of the running example with a three stage
// latency: x*y reaches out on the slow path two cycles after p1.
inline const char* kMultiplierIr = R"(reg ct : 1;
reg flp_res : 1;
wire iszero : 1;
reg out : 1;
reg p1 : 1;
reg x : 1;
reg y : 1;
source x;
source y;
sink out;
process 0 {
  assign iszero := ||(==(x, 0), ==(y, 0));
}
process 1 {
  p1 <= *(x, y);
  flp_res <= p1;
}
process 2 {
  if (ct) {
    out <= flp_res;
  } else {
    if (iszero) {
      out <= 0;
    } else {
      out <= flp_res;
    }
  }
}
)";

inline std::pair<ctlive::Program, ctlive::AnnotationSet> multiplier() {
    return ctlive::parse_program(kMultiplierIr);
}

}  // namespace fixtures
