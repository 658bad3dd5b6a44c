#include "doctest.h"
#include "lemmas.hh"

using namespace tm_test;

namespace {

void expect(const SuiteResult& r) {
    INFO(r.name << ": " << r.first_failure);
    CHECK(r.cases >= 200);
    CHECK(r.failures == 0);
}

}  // namespace

TEST_CASE("lemma: Tr preserves satisfaction") { expect(lemma_tr()); }
TEST_CASE("lemma: dualization") { expect(lemma_dual()); }
TEST_CASE("lemma: booleanization") { expect(lemma_bool()); }
TEST_CASE("lemma: saturation") { expect(lemma_saturation()); }
TEST_CASE("lemma: positive formula") { expect(lemma_positive()); }
TEST_CASE("lemma: bool and dual commute") { expect(lemma_bool_dual()); }
TEST_CASE("lemma: pos and bool commute") { expect(lemma_pos_bool()); }
