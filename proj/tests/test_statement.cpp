#include <doctest.h>

#include <algorithm>

#include "evostmt/errors.hpp"
#include "evostmt/statement.hpp"
#include "helpers.hpp"

using namespace evostmt;

TEST_CASE("parse: binder group and equation goal") {
  auto f = parse_file(
      "import Mathlib\ntheorem t (a b : G) : a*b = g*(b*a)*g^(-1) := by sorry");
  CHECK(f.preamble == std::vector<std::string>{"import Mathlib"});
  CHECK(f.decl_name == "t");
  REQUIRE(f.binders.size() == 1);
  CHECK(f.binders[0].kind == BinderKind::Explicit);
  CHECK(f.binders[0].names == std::vector<std::string>{"a", "b"});
  CHECK(f.goal->kind == ExprKind::Relation);
  CHECK(f.goal->rel == RelKind::Eq);
  CHECK(f.proof_body == "by sorry");
}

TEST_CASE("parse: minimal file, no binders, atom goal") {
  auto f = parse_file("import Mathlib\ntheorem t : True := by sorry");
  CHECK(f.binders.empty());
  CHECK(f.goal->kind == ExprKind::Atom);
  CHECK(f.goal->text == "True");
}

TEST_CASE("parse: declaration count errors") {
  CHECK_THROWS_AS(parse_file("theorem a : True := by sorry\ntheorem b : True := by sorry\n"),
                  MultipleDeclarations);
  CHECK_THROWS_AS(parse_file("import Mathlib\nexample : True := by trivial\n"), NoDeclaration);
  CHECK_THROWS_AS(parse_file("theorem t : True"), ParseError);
  CHECK_THROWS_AS(parse_file("x"), NoDeclaration);
}

TEST_CASE("parse: implicit, instance and anonymous instance binders") {
  auto f = parse_file(
      "import Mathlib\n"
      "theorem my_theorem_xxx {G : Type*} [Group G] (a b : G) :\n"
      "  exists g : G, a * b = g * (b * a) * g^(-1) := by sorry\n");
  REQUIRE(f.binders.size() == 3);
  CHECK(f.binders[0].kind == BinderKind::Implicit);
  CHECK(f.binders[1].kind == BinderKind::Instance);
  CHECK(f.binders[1].names.empty());
  CHECK(f.binders[2].kind == BinderKind::Explicit);
  CHECK(f.goal->kind == ExprKind::Quantifier);
  CHECK(f.goal->quant == QuantKind::Exists);
}

TEST_CASE("print: fixed point after one round trip") {
  const char* samples[] = {
      "import Mathlib\ntheorem t (a b : G) : a*b = g*(b*a)*g^(-1) := by sorry",
      "theorem t : P /\\ Q \\/ R := by sorry",
      "import Mathlib\nopen Nat\ntheorem t2 (h : a < b) : b > a := by sorry",
      "theorem t : forall x y : Nat, x = y -> y = x := by sorry",
      "theorem t [inst : Fact (Nat.Prime p)] : IsPrimitiveRoot 3 p := by sorry",
      "theorem pair (x : Prod Nat Nat) : x = (1, 2) := by sorry",
  };
  for (const char* s : samples) {
    CAPTURE(s);
    std::string once = print_file(parse_file(s));
    std::string twice = print_file(parse_file(once));
    CHECK(once == twice);
    CHECK(file_equal(parse_file(once), parse_file(twice)));
  }
}

TEST_CASE("print: unicode input normalizes to ascii") {
  auto f = parse_file(
      "import Mathlib\ntheorem t : \xE2\x88\x80 x : Nat, P \xE2\x88\xA7 Q \xE2\x86\x92 x \xE2\x89\xA4 x := by sorry");
  std::string printed = print_file(f);
  CHECK(printed.find("forall") != std::string::npos);
  CHECK(printed.find("/\\") != std::string::npos);
  CHECK(printed.find("->") != std::string::npos);
  CHECK(printed.find("<=") != std::string::npos);
  CHECK(printed.find('\xE2') == std::string::npos);
  CHECK(print_file(parse_file(printed)) == printed);
}

TEST_CASE("print: empty preamble gives declaration-only text") {
  auto f = parse_file("theorem t : True := by sorry");
  CHECK(print_file(f) == "theorem t : True := by sorry\n");
}

TEST_CASE("print: precedence without explicit parens is stable") {
  auto f = parse_file("theorem t : P /\\ Q \\/ R := by sorry");
  REQUIRE(f.goal->kind == ExprKind::Connective);
  CHECK(f.goal->conn == ConnKind::Or);  // and binds tighter
  CHECK(f.goal->children[0]->conn == ConnKind::And);
  auto g = parse_file("theorem t : P -> Q -> R := by sorry");
  CHECK(g.goal->kind == ExprKind::Arrow);
  CHECK(g.goal->children[1]->kind == ExprKind::Arrow);  // right associative
}

TEST_CASE("canonicalize: theorem name is normalized away") {
  auto a = canonicalize(parse_file("import Mathlib\ntheorem foo (a : G) : a = a := by sorry"));
  auto b = canonicalize(parse_file("import Mathlib\ntheorem bar (a : G) : a = a := by sorry"));
  CHECK(a == b);
  CHECK(a.digest() == b.digest());
}

TEST_CASE("canonicalize: alpha equivalence of binder names") {
  auto a = canonicalize(
      parse_file("import Mathlib\ntheorem t (a b : G) : a*b = g*(b*a)*g^(-1) := by sorry"));
  auto b = canonicalize(
      parse_file("import Mathlib\ntheorem t (x y : G) : x*y = g*(y*x)*g^(-1) := by sorry"));
  CHECK(a == b);
}

TEST_CASE("canonicalize: whitespace runs are invariant") {
  auto a = canonicalize(parse_file("import  Mathlib\ntheorem t (a :  G) : a =  a := by   sorry"));
  auto b = canonicalize(parse_file("import Mathlib\ntheorem t (a : G) : a = a := by sorry"));
  CHECK(a == b);
}

TEST_CASE("canonicalize: logical rewrites are not applied") {
  auto a = canonicalize(parse_file("theorem t : P /\\ Q := by sorry"));
  auto b = canonicalize(parse_file("theorem t : Q /\\ P := by sorry"));
  CHECK_FALSE(a == b);
}

TEST_CASE("canonicalize: sensitive to binder kind and preamble") {
  auto a = canonicalize(parse_file("theorem t (a : G) : a = a := by sorry"));
  auto b = canonicalize(parse_file("theorem t {a : G} : a = a := by sorry"));
  CHECK_FALSE(a == b);
  auto c = canonicalize(parse_file("import Mathlib\ntheorem t (a : G) : a = a := by sorry"));
  CHECK_FALSE(a == c);
}

TEST_CASE("canonicalize: quantifier binders rename in order, scoped") {
  auto a = canonicalize(
      parse_file("theorem t (n : Nat) : forall x : Nat, exists y : Nat, x = y /\\ n = n := by sorry"));
  auto b = canonicalize(
      parse_file("theorem t (m : Nat) : forall u : Nat, exists v : Nat, u = v /\\ m = m := by sorry"));
  CHECK(a == b);
  CHECK(a.key.find("v0") != std::string::npos);
  CHECK(a.key.find("v1") != std::string::npos);
  CHECK(a.key.find("v2") != std::string::npos);
}

TEST_CASE("round-trip and canonical stability over a random corpus") {
  Rng rng(2024);
  for (int i = 0; i < 200; ++i) {
    StatementFile f = testutil::random_file(rng);
    std::string text = print_file(f);
    CAPTURE(text);
    StatementFile parsed = parse_file(text);
    CHECK(file_equal(parsed, f));
    CHECK(print_file(parsed) == text);
    CHECK(canonicalize(parsed) == canonicalize(f));
  }
}

TEST_CASE("classify: complete theorem output") {
  const char* text =
      "import Mathlib\n\n"
      "theorem my_theorem_123 {R : Type*} [CommRing R] (a : R) :\n"
      "  forall x y : R, x * a = 0 -> y * a = 0 -> (x + y) * a = 0 := by\n"
      "  intro x y hx hy\n"
      "  calc (x + y) * a = x * a + y * a := by ring\n"
      "    _ = 0 := by simp [hx, hy]\n";
  auto c = classify_proof_output(text);
  CHECK(c.sorry_count == 0);
  CHECK(c.complete);
  CHECK(c.theorem_complete);
}

TEST_CASE("classify: excerpt with two sorry tokens") {
  const char* text =
      "import Mathlib\n\n"
      "theorem my_theorem_12345 {G : Type*} [Group G] [Fintype G] (p q : Nat)\n"
      "  (hp : p.Prime) (hq : q.Prime) (hcard : Fintype.card G = p * q) :\n"
      "    Not (IsSimpleGroup G) := by\n"
      "  have h_main : Not (IsSimpleGroup G) := by sorry\n"
      "  sorry\n";
  auto c = classify_proof_output(text);
  CHECK(c.sorry_count == 2);
  CHECK_FALSE(c.complete);
  CHECK_FALSE(c.theorem_complete);
  CHECK(c.has_theorem);
}

TEST_CASE("classify: def-only output is complete but not theorem-complete") {
  auto c = classify_proof_output("def f := 1\n");
  CHECK(c.complete);
  CHECK_FALSE(c.theorem_complete);
}

TEST_CASE("classify: token boundaries, comments and strings") {
  CHECK(classify_proof_output("exact sorryAx _\n").sorry_count == 0);
  CHECK(classify_proof_output("-- sorry\ntheorem t : True := by trivial\n").sorry_count == 0);
  CHECK(classify_proof_output("/- sorry /- sorry -/ -/ by trivial\n").sorry_count == 0);
  CHECK(classify_proof_output("example := \"sorry\"\n").sorry_count == 0);
  CHECK(classify_proof_output("by sorry\n").sorry_count == 1);
  CHECK(classify_proof_output("-- theorem\nby trivial").has_theorem == false);
}

TEST_CASE("classify: inserting sorry never turns complete on") {
  Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    StatementFile f = testutil::random_file(rng);
    std::string text = print_file(f);
    std::string mutated =
        text.substr(0, text.size() / 2) + " sorry " + text.substr(text.size() / 2);
    auto before = classify_proof_output(text);
    auto after = classify_proof_output(mutated);
    if (!before.complete) CHECK_FALSE(after.complete);
    CHECK(after.sorry_count >= before.sorry_count);
  }
}

TEST_CASE("free and bound identifier queries") {
  auto f = parse_file(
      "theorem t (a : G) (h : a < c) : forall x : Nat, a = a /\\ x = x := by sorry");
  auto frees = free_identifiers(f);
  CHECK(std::find(frees.begin(), frees.end(), "G") != frees.end());
  CHECK(std::find(frees.begin(), frees.end(), "c") != frees.end());
  CHECK(std::find(frees.begin(), frees.end(), "Nat") != frees.end());
  CHECK(std::find(frees.begin(), frees.end(), "a") == frees.end());
  CHECK(std::find(frees.begin(), frees.end(), "x") == frees.end());
  auto bound = bound_names(f);
  CHECK(bound == std::vector<std::string>{"a", "h", "x"});
}
