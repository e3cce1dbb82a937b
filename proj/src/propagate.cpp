#include "domcheck/propagate.hpp"

namespace domcheck {

const char* to_string(Evaluation e) {
  return e == Evaluation::projected ? "projected" : "literal";
}

Evaluation choose_evaluation(const OrbitModel& model, const ProjectorFamily& pf,
                             double tolerance) {
  return check_invariance(model, pf, tolerance).pass ? Evaluation::projected
                                                      : Evaluation::literal;
}

}  // namespace domcheck
