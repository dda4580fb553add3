#include <gtest/gtest.h>

#include "crnpid/sim.hpp"

namespace {

// Every simulation run by a test binary feeds the process-wide audit; check
// it once all tests have finished.
class NonnegativityEnvironment : public ::testing::Environment {
 public:
  void TearDown() override {
    const auto audit = crnpid::nonnegativity_audit();
    EXPECT_GE(audit.min_unclamped, -1e-9) << "pre-clamp sample below -1e-9 across " << audit.runs << " runs";
    EXPECT_GE(audit.min_exported, 0.0) << "exported sample below 0 across " << audit.runs << " runs";
  }
};

}  // namespace

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  ::testing::AddGlobalTestEnvironment(new NonnegativityEnvironment);
  return RUN_ALL_TESTS();
}
