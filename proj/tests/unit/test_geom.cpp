#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "../oracles/aabb_oracle.hpp"
#include "../support/expect_error.hpp"
#include "dthread/geom/compat.hpp"
#include "dthread/geom/link.hpp"
#include "dthread/geom/part21.hpp"
#include "dthread/geom/step_model.hpp"

using namespace dthread;
using namespace dthread::geom;
using dthread::testing::code_of;

namespace {

std::string fixture(const std::string& name) {
  std::ifstream in(std::string(DTHREAD_FIXTURES) + "/step/" + name, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void expect_box(const Aabb& box, Vec3 lo, Vec3 hi) {
  ASSERT_FALSE(box.is_empty());
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(box.min()[i], lo[i], 1e-9) << "min " << i;
    EXPECT_NEAR(box.max()[i], hi[i], 1e-9) << "max " << i;
  }
}

void expect_point(const Vec3& p, const Vec3& q) {
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], q[i], 1e-12);
}

const std::string kMini =
    "ISO-10303-21;\nHEADER;\nFILE_DESCRIPTION((''),'2;1');\nFILE_NAME('m','t',(''),(''),'','','');\n"
    "FILE_SCHEMA(('CONFIG_CONTROL_DESIGN'));\nENDSEC;\nDATA;\n";

}  // namespace

TEST(Part21, TokenizesLiterals) {
  auto toks = tokenize_step("#12=FOO('it''s',.T.,-1.5E+02,42,\"0F\",$,*,#3);/* c */");
  std::vector<TokenKind> kinds;
  for (const auto& t : toks) kinds.push_back(t.kind);
  ASSERT_EQ(toks.size(), 21u);
  EXPECT_EQ(toks[0].kind, TokenKind::kInstance);
  EXPECT_EQ(toks[2].raw, "FOO");
  EXPECT_EQ(toks[4].kind, TokenKind::kString);
  EXPECT_EQ(toks[4].raw, "'it''s'");
  EXPECT_EQ(toks[6].kind, TokenKind::kEnum);
  EXPECT_EQ(toks[8].kind, TokenKind::kReal);
  EXPECT_EQ(toks[10].kind, TokenKind::kInteger);
  EXPECT_EQ(toks[12].kind, TokenKind::kBinary);
}

TEST(Part21, DecodesStringEscapes) {
  EXPECT_EQ(decode_step_string("'it''s'"), "it's");
  EXPECT_EQ(decode_step_string("'a\\\\b'"), "a\\b");
  EXPECT_EQ(decode_step_string("'\\X\\E9t\\X\\E9'"), "\xC3\xA9t\xC3\xA9");
  EXPECT_EQ(decode_step_string("'\\X2\\03B103B2\\X0\\'"), "\xCE\xB1\xCE\xB2");
  EXPECT_EQ(decode_step_string("'\\X4\\0001F600\\X0\\'"), "\xF0\x9F\x98\x80");
  EXPECT_EQ(decode_step_string("'\\S\\i'"), "\xC3\xA9");
}

TEST(Part21, ParsesTypedAggregatesAndPlaceholders) {
  auto f = parse_part21(kMini +
                        "#1=MEASURE(LENGTH_MEASURE(2.5),(1,(2,3)),$,*,.UNKNOWN.);\n"
                        "#2=REF(#1,'x');\nENDSEC;\nEND-ISO-10303-21;\n");
  ASSERT_EQ(f.entities.size(), 2u);
  const auto& p = f.entities.at(1).parts[0].params;
  ASSERT_EQ(p.size(), 5u);
  ASSERT_TRUE(p[0].typed());
  EXPECT_EQ(p[0].typed()->type, "LENGTH_MEASURE");
  EXPECT_EQ(p[0].typed()->value->number(), 2.5);
  ASSERT_TRUE(p[1].list());
  EXPECT_EQ((*p[1].list())[1].list()->size(), 2u);
  EXPECT_TRUE(p[2].is_unset());
  EXPECT_EQ(p[4].enumeration()->name, "UNKNOWN");
  EXPECT_EQ(f.entities.at(2).parts[0].params[0].ref()->id, 1u);
  EXPECT_EQ(f.header.file_name, "m");
  EXPECT_EQ(f.header.schemas, std::vector<std::string>{"CONFIG_CONTROL_DESIGN"});
}

TEST(Part21, PreservesUnknownEntities) {
  auto f = parse_part21(kMini + "#7=SOMETHING_VENDOR_SPECIFIC('a',(#8));#8=(A() B(1.));\nENDSEC;\nEND-ISO-10303-21;\n");
  EXPECT_EQ(f.entities.at(7).type(), "SOMETHING_VENDOR_SPECIFIC");
  EXPECT_TRUE(f.entities.at(8).complex);
  EXPECT_TRUE(f.entities.at(8).is("B"));
}

TEST(Part21, ReadsLatin1Files) {
  std::string body = kMini + "#1=PRODUCT('p','Halterung f\xFC" "r Kamera','',());\nENDSEC;\nEND-ISO-10303-21;\n";
  auto m = parse_step(body);
  EXPECT_EQ(m.file.encoding, "ISO-8859-1");
  EXPECT_EQ(m.products.at(0).name, "Halterung f\xC3\xBCr Kamera");
}

TEST(Part21, RejectsDuplicateInstances) {
  EXPECT_EQ(code_of([&] { parse_part21(kMini + "#1=A();#1=B();\nENDSEC;\nEND-ISO-10303-21;\n"); }), Errc::kSyntax);
}

TEST(Part21, TokenRoundTripMatchesDataSection) {
  for (const char* name : {"cube.stp", "two_part.stp", "rotated.stp", "cube_inch.stp", "empty_assembly.stp"}) {
    const std::string text = fixture(name);
    auto toks = tokenize_step(text);
    auto [lo, hi] = data_section_range(toks);
    std::string joined;
    for (auto i = lo; i < hi; ++i) joined += toks[i].raw;
    const auto start = text.find("DATA;") + 5;
    const auto end = text.rfind("ENDSEC;");
    std::string stripped;
    for (char c : text.substr(start, end - start)) {
      if (c != '\n' && c != ' ') stripped.push_back(c);
    }
    // whitespace inside string literals is significant
    std::string joined_stripped;
    for (char c : joined) {
      if (c != ' ') joined_stripped.push_back(c);
    }
    EXPECT_EQ(joined_stripped, stripped) << name;
  }
}

TEST(StepModel, UnitCube) {
  auto m = parse_step(fixture("cube.stp"));
  ASSERT_EQ(m.products.size(), 1u);
  EXPECT_EQ(m.products[0].name, "CUBE");
  EXPECT_EQ(m.products[0].points.size(), 8u);
  EXPECT_EQ(m.length_unit, "mm");
  expect_box(compute_aabb(m, m.products[0].id, false), {0, 0, 0}, {1, 1, 1});
  ASSERT_TRUE(m.products[0].primary_axis);
  expect_point(*m.products[0].primary_axis, {0, 0, 1});
}

TEST(StepModel, LengthUnitsScaleToMillimetres) {
  auto cm = parse_step(fixture("cube_cm.stp"));
  EXPECT_EQ(cm.length_unit, "cm");
  expect_box(compute_aabb(cm, cm.products[0].id, false), {0, 0, 0}, {10, 10, 10});
  auto inch = parse_step(fixture("cube_inch.stp"));
  EXPECT_EQ(inch.length_unit, "INCH");
  expect_box(compute_aabb(inch, inch.products[0].id, false), {0, 0, 0}, {25.4, 25.4, 25.4});
}

TEST(StepModel, MissingUnitDefaultsToMillimetresWithNote) {
  auto m = parse_step(kMini + "#1=PRODUCT('p','P','',());\nENDSEC;\nEND-ISO-10303-21;\n");
  EXPECT_EQ(m.length_scale, 1.0);
  ASSERT_FALSE(m.notes.empty());
  EXPECT_NE(m.notes[0].find("millimetres"), std::string::npos);
}

TEST(StepModel, TwoPartAssembly) {
  auto m = parse_step(fixture("two_part.stp"));
  ASSERT_EQ(m.products.size(), 2u);
  const auto& plate = m.product_named("PLATE");
  const auto& pin = m.product_named("PIN");
  ASSERT_EQ(plate.children.size(), 1u);
  EXPECT_EQ(plate.children[0].child, pin.id);
  EXPECT_TRUE(pin.children.empty());
  expect_point(plate.children[0].transform.translation, {10, 0, 0});
  EXPECT_TRUE(plate.children[0].transform.rotation.isIdentity(1e-12));
  EXPECT_EQ(m.roots(), std::vector<std::uint64_t>{plate.id});
  expect_box(compute_aabb(m, plate.id, true), {0, 0, 0}, {11, 1, 1});
  expect_box(compute_aabb(m, plate.id, false), {0, 0, 0}, {1, 1, 1});
  expect_box(world_aabb(m, pin.id), {10, 0, 0}, {11, 1, 1});
  EXPECT_TRUE(m.notes.empty()) << m.notes.front();
}

TEST(StepModel, RotatedSubAssembly) {
  auto m = parse_step(fixture("rotated.stp"));
  const auto& root = m.product_named("ROOT");
  const auto& sub = m.product_named("SUB");
  const auto& leaf = m.product_named("LEAF");
  ASSERT_EQ(root.children.size(), 1u);
  ASSERT_EQ(sub.children.size(), 1u);
  EXPECT_EQ(root.children[0].child, sub.id);
  EXPECT_EQ(sub.children[0].child, leaf.id);
  expect_point(root.children[0].transform.apply({1, 0, 0}), {100, 1, 0});
  expect_box(compute_aabb(m, sub.id, true), {0, 0, 0}, {7, 1, 1});
  expect_box(world_aabb(m, sub.id), {99, 0, 0}, {100, 7, 1});
  expect_box(world_aabb(m, leaf.id), {99, 5, 0}, {100, 7, 1});
  expect_box(compute_aabb(m, root.id, true), {0, 0, -1}, {120, 10, 1});
  expect_point(world_geometry(m, leaf.id).axis.value(), {0, 0, 1});
}

TEST(StepModel, PointFreeProductIsEmpty) {
  auto m = parse_step(fixture("empty_assembly.stp"));
  const auto& a = m.product_named("ASSEMBLY");
  EXPECT_TRUE(compute_aabb(m, a.id, false).is_empty());
  expect_box(compute_aabb(m, a.id, true), {0, 0, 3}, {4, 2, 4});
}

TEST(StepModel, ChildBoxesContainParentOnlyBox) {
  for (const char* name : {"two_part.stp", "rotated.stp", "empty_assembly.stp"}) {
    auto m = parse_step(fixture(name));
    for (const auto& p : m.products) {
      auto with = compute_aabb(m, p.id, true);
      auto without = compute_aabb(m, p.id, false);
      if (without.is_empty()) continue;
      EXPECT_TRUE(with.contains(without, 1e-12)) << name << " " << p.name;
    }
  }
}

TEST(StepModel, UnknownProductAndDuplicateNames) {
  auto m = parse_step(fixture("cube.stp"));
  EXPECT_EQ(code_of([&] { compute_aabb(m, 4242, true); }), Errc::kUnknownProduct);
  EXPECT_EQ(code_of([&] { m.product_named("NOPE"); }), Errc::kUnknownProduct);
  auto d = parse_step(kMini + "#1=PRODUCT('a','X','',());#2=PRODUCT('b','X','',());\nENDSEC;\nEND-ISO-10303-21;\n");
  EXPECT_EQ(code_of([&] { d.product_named("X"); }), Errc::kDuplicateName);
}

TEST(StepFaults, UnresolvedReferenceNamesInstance) {
  try {
    parse_step(fixture("fault_unresolved.stp"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kUnresolvedReference);
    EXPECT_NE(std::string(e.what()).find("#99"), std::string::npos);
  }
}

TEST(StepFaults, LexicalErrorIsPositioned) {
  try {
    parse_step(fixture("fault_lexical.stp"));
    FAIL();
  } catch (const StepSyntaxError& e) {
    EXPECT_EQ(e.line(), 28u);
    EXPECT_EQ(e.column(), 37u);
  }
}

TEST(StepFaults, MissingHeader) {
  EXPECT_EQ(code_of([&] { parse_step(fixture("fault_missing_header.stp")); }), Errc::kMissingHeader);
  EXPECT_EQ(code_of([&] { parse_step("DATA;\nENDSEC;\n"); }), Errc::kMissingHeader);
}

TEST(StepFaults, CyclicAssembly) {
  try {
    parse_step(fixture("fault_cycle.stp"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kCyclicAssembly);
    EXPECT_NE(std::string(e.what()).find("ALPHA"), std::string::npos);
  }
}

TEST(StepFaults, TruncatedFileIsPositioned) {
  std::string text = fixture("cube.stp");
  text.resize(text.size() / 2);
  EXPECT_EQ(code_of([&] { parse_step(text); }), Errc::kSyntax);
}

TEST(Transforms, ComposeExamples) {
  const std::vector<Transform> ids{Transform::identity(), Transform::identity()};
  auto id = compose_transforms(ids);
  EXPECT_TRUE(id.rotation.isIdentity(0));
  EXPECT_TRUE(id.translation.isZero(0));
  auto t = compose_transforms(std::vector<Transform>{Transform::translate({1, 0, 0}), Transform::translate({0, 2, 0})});
  expect_point(t.translation, {1, 2, 0});
  auto r = compose_transforms(std::vector<Transform>{Transform::rotate_z(90), Transform::translate({1, 0, 0})});
  expect_point(r.apply({1, 0, 0}), {1, 1, 0});
}

TEST(Transforms, RejectsNonRigid) {
  Transform s;
  s.rotation *= 2.0;
  EXPECT_EQ(code_of([&] { compose_transforms(std::vector<Transform>{s}); }), Errc::kNonRigidTransform);
  EXPECT_EQ(code_of([&] { placement_frame({0, 0, 0}, {0, 0, 1}, {0, 0, 2}); }), Errc::kNonRigidTransform);
}

TEST(Transforms, RigidAfterHundredRandomCompositions) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Transform> chain;
  for (int i = 0; i < 100; ++i) {
    Vec3 axis(u(rng), u(rng), u(rng));
    Vec3 ref(u(rng), u(rng), u(rng));
    chain.push_back(placement_frame({u(rng) * 100, u(rng) * 100, u(rng) * 100}, axis, ref));
  }
  auto t = compose_transforms(chain);
  EXPECT_TRUE(t.is_rigid(1e-6));
  EXPECT_NEAR((t.rotation.transpose() * t.rotation - Eigen::Matrix3d::Identity()).norm(), 0, 1e-6);
  EXPECT_NEAR(t.rotation.determinant(), 1, 1e-6);
  auto back = compose_transforms(std::vector<Transform>{t, t.inverse()});
  EXPECT_TRUE(back.rotation.isIdentity(1e-9));
  EXPECT_LT(back.translation.norm(), 1e-9);
}

TEST(Aabb, EmptyAndDistances) {
  Aabb e;
  EXPECT_TRUE(e.is_empty());
  EXPECT_FALSE(e.intersects(Aabb({0, 0, 0}, {1, 1, 1})));
  Aabb a({0, 0, 0}, {1, 1, 1});
  Aabb b({4, 5, 0}, {5, 6, 1});
  EXPECT_DOUBLE_EQ(a.chebyshev_gap(b), 4);
  EXPECT_DOUBLE_EQ(a.distance(b), 5);
  EXPECT_TRUE(a.intersects(Aabb({1, 0, 0}, {2, 1, 1})));
  EXPECT_EQ(code_of([] { Aabb({1, 0, 0}, {0, 1, 1}); }), Errc::kInvalidArgument);
}

TEST(Aabb, IntersectionMatchesPointSamplingOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> coord(-6, 6);
  int meets = 0;
  for (int i = 0; i < 200; ++i) {
    oracle::Box ob[2];
    Aabb boxes[2];
    for (int k = 0; k < 2; ++k) {
      for (int d = 0; d < 3; ++d) {
        int x = coord(rng), y = coord(rng);
        ob[k].lo[d] = std::min(x, y) * 0.5;
        ob[k].hi[d] = std::max(x, y) * 0.5;
      }
      boxes[k] = Aabb({ob[k].lo[0], ob[k].lo[1], ob[k].lo[2]}, {ob[k].hi[0], ob[k].hi[1], ob[k].hi[2]});
    }
    const bool expected = oracle::boxes_meet(ob[0], ob[1]);
    meets += expected;
    EXPECT_EQ(boxes[0].intersects(boxes[1]), expected) << i;
    EXPECT_EQ(boxes[1].intersects(boxes[0]), expected) << i;
  }
  EXPECT_GT(meets, 20);
  EXPECT_LT(meets, 180);
}

namespace {

core::Interaction interaction(core::InteractionKind kind) {
  core::Interaction i;
  i.a = Uid{"cmp", 0};
  i.b = Uid{"cmp", 1};
  i.kind = kind;
  i.directed = kind != core::InteractionKind::kSpatial;
  return i;
}

}  // namespace

TEST(Compat, SharedFaceHasNoFindings) {
  PartGeometry a{Aabb({0, 0, 0}, {1, 1, 1}), Vec3::UnitZ()};
  PartGeometry b{Aabb({1, 0, 0}, {2, 1, 1}), Vec3::UnitZ()};
  EXPECT_TRUE(geometric_compatibility(a, b, interaction(core::InteractionKind::kSpatial), true).empty());
}

TEST(Compat, SeparatedCubesMissContact) {
  PartGeometry a{Aabb({0, 0, 0}, {1, 1, 1}), std::nullopt};
  PartGeometry b{Aabb({11, 0, 0}, {12, 1, 1}), std::nullopt};
  auto f = geometric_compatibility(a, b, interaction(core::InteractionKind::kSpatial), true);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].rule, GeoRule::kMissingContact);
  EXPECT_EQ(f[0].measured.to_string(), "10 mm");
  EXPECT_EQ(f[0].threshold.unit, f[0].measured.unit);
}

TEST(Compat, ContactToleranceBoundary) {
  PartGeometry a{Aabb({0, 0, 0}, {1, 1, 1}), std::nullopt};
  PartGeometry near{Aabb({2, 0, 0}, {3, 1, 1}), std::nullopt};
  PartGeometry far{Aabb({2.01, 0, 0}, {3, 1, 1}), std::nullopt};
  EXPECT_TRUE(geometric_compatibility(a, near, interaction(core::InteractionKind::kSpatial), true).empty());
  EXPECT_EQ(geometric_compatibility(a, far, interaction(core::InteractionKind::kSpatial), true).size(), 1u);
}

TEST(Compat, ClearanceForNonSpatialInteractions) {
  PartGeometry a{Aabb({0, 0, 0}, {1, 1, 1}), std::nullopt};
  PartGeometry b{Aabb({1.5, 0, 0}, {2, 1, 1}), std::nullopt};
  auto f = geometric_compatibility(a, b, interaction(core::InteractionKind::kEnergy), false);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].rule, GeoRule::kClearanceViolation);
  EXPECT_EQ(f[0].measured.to_string(), "0.5 mm");
  EXPECT_TRUE(geometric_compatibility(a, b, interaction(core::InteractionKind::kEnergy), true).empty());
  PartGeometry c{Aabb({2, 0, 0}, {3, 1, 1}), std::nullopt};
  EXPECT_TRUE(geometric_compatibility(a, c, interaction(core::InteractionKind::kInformation), false).empty());
}

TEST(Compat, AxisMisalignment) {
  PartGeometry a{Aabb({0, 0, 0}, {1, 1, 1}), Vec3::UnitZ()};
  PartGeometry flipped{Aabb({1, 0, 0}, {2, 1, 1}), -Vec3::UnitZ()};
  PartGeometry tilted{Aabb({1, 0, 0}, {2, 1, 1}), Vec3(0, std::sin(0.1), std::cos(0.1))};
  EXPECT_TRUE(geometric_compatibility(a, flipped, interaction(core::InteractionKind::kSpatial), true).empty());
  auto f = geometric_compatibility(a, tilted, interaction(core::InteractionKind::kSpatial), true);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].rule, GeoRule::kAxisMisalignment);
  EXPECT_EQ(f[0].measured.unit, "deg");
  EXPECT_NEAR(f[0].measured.value.to_double(), 0.1 * 180 / M_PI, 1e-6);
}

TEST(Link, BindsComponentsByProductName) {
  core::Model model;
  auto pin = model.add_component({{}, "Pin", {}, {}, {}});
  auto other = model.add_component({{}, "Gearbox", {}, {}, {}});
  const std::string bytes = fixture("two_part.stp");
  auto step = parse_step(bytes);
  auto s = link_geometry(model, "two_part.stp", bytes, step);
  ASSERT_EQ(s.linked.size(), 1u);
  EXPECT_EQ(s.linked[0].first, pin);
  EXPECT_EQ(s.unmatched_products, std::vector<std::string>{"PLATE"});
  EXPECT_EQ(model.locator(pin, core::Modality::kGeometry), "two_part.stp#PRODUCT'PIN'");
  EXPECT_FALSE(model.locator(other, core::Modality::kGeometry));
  EXPECT_TRUE(model.validate_integrity().empty());

  GeometryIndex index;
  index.add("two_part.stp", step);
  auto g = index.part(model, pin);
  ASSERT_TRUE(g);
  expect_box(g->box, {10, 0, 0}, {11, 1, 1});
  EXPECT_FALSE(index.part(model, other));

  auto again = link_geometry(model, "two_part.stp", bytes, step);
  EXPECT_EQ(model.geometry().size(), 1u);
  EXPECT_TRUE(again.linked.empty());
  EXPECT_TRUE(model.validate_integrity().empty());
}

TEST(Link, IndexLoadWarnsOnMissingAndChangedFiles) {
  core::Model model;
  core::GeometryArtifact a{{}, "step/cube.stp", "0000", {"CUBE"}};
  core::GeometryArtifact b{{}, "step/nope.stp", "0000", {}};
  model.add_geometry(a);
  model.add_geometry(b);
  std::vector<std::string> warnings;
  auto index = GeometryIndex::load(model, DTHREAD_FIXTURES, &warnings);
  EXPECT_NE(index.file("step/cube.stp"), nullptr);
  ASSERT_EQ(warnings.size(), 2u);
}
