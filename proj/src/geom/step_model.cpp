#include "dthread/geom/step_model.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "dthread/core/error.hpp"

namespace dthread::geom {
namespace {

using Entities = std::map<std::uint64_t, EntityInstance>;

const EntityInstance* get(const Entities& es, const Param& p) {
  const Ref* r = p.ref();
  if (r == nullptr) return nullptr;
  auto it = es.find(r->id);
  return it == es.end() ? nullptr : &it->second;
}

std::optional<std::uint64_t> ref_id(const ParamList& params, std::size_t index) {
  if (index >= params.size() || params[index].ref() == nullptr) return std::nullopt;
  return params[index].ref()->id;
}

std::string string_param(const ParamList& params, std::size_t index) {
  if (index < params.size() && params[index].string()) return *params[index].string();
  return {};
}

std::optional<Vec3> triple(const Param& p) {
  const ParamList* l = p.list();
  if (l == nullptr || l->empty() || l->size() > 3) return std::nullopt;
  Vec3 v = Vec3::Zero();
  for (std::size_t i = 0; i < l->size(); ++i) {
    auto n = (*l)[i].number();
    if (!n) return std::nullopt;
    v[static_cast<int>(i)] = *n;
  }
  return v;
}

std::optional<Vec3> cartesian_point(const EntityInstance& e) {
  const EntityPart* p = e.part("CARTESIAN_POINT");
  if (p == nullptr || p->params.size() < 2) return std::nullopt;
  return triple(p->params[1]);
}

std::optional<Vec3> direction(const Entities& es, const Param& p) {
  const EntityInstance* e = get(es, p);
  if (e == nullptr) return std::nullopt;
  const EntityPart* d = e->part("DIRECTION");
  if (d == nullptr || d->params.size() < 2) return std::nullopt;
  return triple(d->params[1]);
}

struct Lifter {
  const Entities& es;
  StepModel& model;

  double prefix_scale(const EntityPart& si) const {
    // SI_UNIT(prefix, name); metre -> mm
    std::string prefix;
    if (!si.params.empty() && si.params[0].enumeration()) prefix = si.params[0].enumeration()->name;
    static const std::map<std::string, double> scale = {
        {"", 1000.0}, {"MILLI", 1.0}, {"CENTI", 10.0}, {"DECI", 100.0}, {"KILO", 1e6}, {"MICRO", 1e-3}, {"NANO", 1e-6}};
    auto it = scale.find(prefix);
    if (it == scale.end()) throw Error(Errc::kSchema, "unsupported SI prefix ." + prefix + ".");
    return it->second;
  }

  std::optional<double> unit_scale(const EntityInstance& unit, int depth = 0) const {
    if (depth > 8) return std::nullopt;
    if (const auto* si = unit.part("SI_UNIT")) {
      if (si->params.size() >= 2 && si->params[1].enumeration() && si->params[1].enumeration()->name == "METRE") {
        return prefix_scale(*si);
      }
      return std::nullopt;
    }
    if (const auto* cb = unit.part("CONVERSION_BASED_UNIT")) {
      if (cb->params.size() < 2) return std::nullopt;
      const EntityInstance* m = get(es, cb->params[1]);
      if (m == nullptr || m->parts.front().params.size() < 2) return std::nullopt;
      const auto& mp = m->parts.front().params;
      std::optional<double> value = mp[0].number();
      if (!value && mp[0].typed()) value = mp[0].typed()->value->number();
      const EntityInstance* base = get(es, mp[1]);
      if (!value || base == nullptr) return std::nullopt;
      auto base_scale = unit_scale(*base, depth + 1);
      if (!base_scale) return std::nullopt;
      return *value * *base_scale;
    }
    return std::nullopt;
  }

  void read_length_unit() {
    // units named by a representation context win over stray unit entities
    std::vector<const EntityInstance*> candidates;
    for (const auto& [id, e] : es) {
      const EntityPart* ctx = e.part("GLOBAL_UNIT_ASSIGNED_CONTEXT");
      if (ctx == nullptr || ctx->params.empty() || !ctx->params[0].list()) continue;
      for (const auto& u : *ctx->params[0].list()) {
        const EntityInstance* unit = get(es, u);
        if (unit != nullptr && unit->is("LENGTH_UNIT")) candidates.push_back(unit);
      }
    }
    if (candidates.empty()) {
      for (const auto& [id, e] : es) {
        if (e.is("LENGTH_UNIT")) candidates.push_back(&e);
      }
    }
    std::set<double> seen;
    bool found = false;
    for (const EntityInstance* unit : candidates) {
      const EntityInstance& e = *unit;
      auto s = unit_scale(e);
      if (!s) continue;
      if (!found) {
        model.length_scale = *s;
        found = true;
        if (const auto* cb = e.part("CONVERSION_BASED_UNIT")) {
          model.length_unit = string_param(cb->params, 0);
        } else {
          static const std::map<double, std::string> names = {{1.0, "mm"}, {10.0, "cm"}, {1000.0, "m"}, {1e6, "km"}, {100.0, "dm"}, {1e-3, "um"}};
          auto it = names.find(*s);
          model.length_unit = it == names.end() ? "m*" + std::to_string(*s / 1000.0) : it->second;
        }
      }
      seen.insert(*s);
    }
    if (!found) model.notes.push_back("no length unit declared; assuming millimetres");
    if (seen.size() > 1) model.notes.push_back("several length units declared; using the first (" + model.length_unit + ")");
  }

  Transform a2p3d(const EntityInstance& e) const {
    const EntityPart* p = e.part("AXIS2_PLACEMENT_3D");
    if (p == nullptr || p->params.size() < 2) {
      throw Error(Errc::kSchema, "#" + std::to_string(e.id) + " is not an AXIS2_PLACEMENT_3D");
    }
    const EntityInstance* loc = get(es, p->params[1]);
    std::optional<Vec3> location = loc ? cartesian_point(*loc) : std::nullopt;
    if (!location) throw Error(Errc::kSchema, "#" + std::to_string(e.id) + " has no location point");
    Vec3 axis = Vec3::UnitZ();
    Vec3 ref = Vec3::UnitX();
    if (p->params.size() > 2 && !p->params[2].is_unset()) {
      auto d = direction(es, p->params[2]);
      if (!d) throw Error(Errc::kSchema, "#" + std::to_string(e.id) + " axis is not a DIRECTION");
      axis = *d;
    }
    if (p->params.size() > 3 && !p->params[3].is_unset()) {
      auto d = direction(es, p->params[3]);
      if (!d) throw Error(Errc::kSchema, "#" + std::to_string(e.id) + " ref_direction is not a DIRECTION");
      ref = *d;
    } else if (std::abs(axis.normalized().dot(Vec3::UnitX())) > 1 - 1e-9) {
      ref = Vec3::UnitY();
    }
    return placement_frame(*location * model.length_scale, axis, ref);
  }

  // representation part with (name, items, context)
  static const EntityPart* representation_part(const EntityInstance& e) {
    for (const auto& p : e.parts) {
      if (p.type.find("REPRESENTATION") != std::string::npos && p.type.find("RELATIONSHIP") == std::string::npos &&
          p.params.size() >= 3 && p.params[1].list()) {
        return &p;
      }
    }
    return nullptr;
  }

  static bool opaque(const EntityInstance& e) {
    for (const auto& p : e.parts) {
      if (p.type == "AXIS2_PLACEMENT_3D" || p.type.find("CONTEXT") != std::string::npos ||
          p.type.find("REPRESENTATION") != std::string::npos || p.type.starts_with("PRODUCT")) {
        return true;
      }
    }
    return false;
  }

  void collect_points(const std::vector<std::uint64_t>& reps, ProductNode& node) const {
    std::set<std::uint64_t> visited;
    std::deque<std::uint64_t> queue;
    for (auto rep_id : reps) {
      const auto& rep = es.at(rep_id);
      const EntityPart* rp = representation_part(rep);
      if (rp == nullptr) continue;
      for (const auto& item : *rp->params[1].list()) {
        const EntityInstance* e = get(es, item);
        if (e == nullptr) continue;
        if (e->is("AXIS2_PLACEMENT_3D")) {
          if (!node.primary_axis) node.primary_axis = a2p3d(*e).rotation.col(2);
          continue;
        }
        if (visited.insert(e->id).second) queue.push_back(e->id);
      }
    }
    std::function<void(const Param&)> push_refs = [&](const Param& p) {
      if (const Ref* r = p.ref()) {
        if (visited.insert(r->id).second) queue.push_back(r->id);
      } else if (const ParamList* l = p.list()) {
        for (const auto& q : *l) push_refs(q);
      } else if (const Typed* t = p.typed()) {
        push_refs(*t->value);
      }
    };
    while (!queue.empty()) {
      const auto& e = es.at(queue.front());
      queue.pop_front();
      if (auto pt = cartesian_point(e)) {
        node.points.push_back(*pt * model.length_scale);
        continue;
      }
      if (opaque(e)) continue;
      for (const auto& part : e.parts) {
        for (const auto& p : part.params) push_refs(p);
      }
    }
  }

  void run() {
    read_length_unit();
    std::map<std::uint64_t, std::uint64_t> formation_product, definition_product;
    std::map<std::uint64_t, std::size_t> node_index;
    for (const auto& [id, e] : es) {
      if (e.complex || e.type() != "PRODUCT") continue;
      ProductNode node;
      node.id = id;
      node.product_id = string_param(e.parts[0].params, 0);
      node.name = string_param(e.parts[0].params, 1);
      if (node.name.empty()) node.name = node.product_id;
      node_index[id] = model.products.size();
      model.products.push_back(std::move(node));
    }
    for (const auto& [id, e] : es) {
      for (const auto& p : e.parts) {
        if (p.type.starts_with("PRODUCT_DEFINITION_FORMATION")) {
          if (auto r = ref_id(p.params, 2); r && node_index.contains(*r)) formation_product[id] = *r;
        }
      }
    }
    for (const auto& [id, e] : es) {
      for (const auto& p : e.parts) {
        if (p.type == "PRODUCT_DEFINITION" || p.type == "PRODUCT_DEFINITION_WITH_ASSOCIATED_DOCUMENTS") {
          if (auto r = ref_id(p.params, 2); r && formation_product.contains(*r)) definition_product[id] = formation_product[*r];
        }
      }
    }
    // PRODUCT_DEFINITION_SHAPE -> what it describes (definition or usage)
    std::map<std::uint64_t, std::uint64_t> shape_of;
    std::multimap<std::uint64_t, std::uint64_t> shapes_by_target;
    for (const auto& [id, e] : es) {
      if (const auto* p = e.part("PRODUCT_DEFINITION_SHAPE")) {
        if (auto r = ref_id(p->params, 2)) {
          shape_of[id] = *r;
          shapes_by_target.emplace(*r, id);
        }
      }
    }
    // shape representations per product, widened over plain
    // SHAPE_REPRESENTATION_RELATIONSHIPs
    std::map<std::uint64_t, std::vector<std::uint64_t>> reps_of;
    std::multimap<std::uint64_t, std::uint64_t> plain_links;
    for (const auto& [id, e] : es) {
      if (const auto* p = e.part("SHAPE_DEFINITION_REPRESENTATION")) {
        auto def = ref_id(p->params, 0);
        auto rep = ref_id(p->params, 1);
        if (!def || !rep || !shape_of.contains(*def)) continue;
        auto target = shape_of[*def];
        if (definition_product.contains(target)) reps_of[definition_product[target]].push_back(*rep);
      }
      if (e.is("SHAPE_REPRESENTATION_RELATIONSHIP") && !e.is("REPRESENTATION_RELATIONSHIP_WITH_TRANSFORMATION")) {
        const EntityPart* rr = e.part("REPRESENTATION_RELATIONSHIP");
        if (rr == nullptr) rr = e.part("SHAPE_REPRESENTATION_RELATIONSHIP");
        auto a = ref_id(rr->params, 2);
        auto b = ref_id(rr->params, 3);
        if (a && b) {
          plain_links.emplace(*a, *b);
          plain_links.emplace(*b, *a);
        }
      }
    }
    std::map<std::uint64_t, std::uint64_t> rep_owner;
    for (auto& [product, reps] : reps_of) {
      std::set<std::uint64_t> all(reps.begin(), reps.end());
      std::deque<std::uint64_t> q(reps.begin(), reps.end());
      while (!q.empty()) {
        auto r = q.front();
        q.pop_front();
        auto [lo, hi] = plain_links.equal_range(r);
        for (auto it = lo; it != hi; ++it) {
          if (all.insert(it->second).second) q.push_back(it->second);
        }
      }
      reps.assign(all.begin(), all.end());
      for (auto r : reps) rep_owner.emplace(r, product);
    }
    for (auto& node : model.products) {
      if (auto it = reps_of.find(node.id); it != reps_of.end()) collect_points(it->second, node);
    }

    // assembly usages
    for (const auto& [id, e] : es) {
      const EntityPart* p = e.part("NEXT_ASSEMBLY_USAGE_OCCURRENCE");
      if (p == nullptr) continue;
      auto relating = ref_id(p->params, 3);
      auto related = ref_id(p->params, 4);
      if (!relating || !related || !definition_product.contains(*relating) || !definition_product.contains(*related)) {
        model.notes.push_back("#" + std::to_string(id) + ": usage does not connect two product definitions; ignored");
        continue;
      }
      const auto parent = definition_product[*relating];
      const auto child = definition_product[*related];
      ChildLink link{child, usage_transform(id, parent, child, shapes_by_target, rep_owner), id};
      model.products[node_index[parent]].children.push_back(link);
    }
    check_acyclic(node_index);
  }

  Transform usage_transform(std::uint64_t usage, std::uint64_t parent, std::uint64_t child,
                            const std::multimap<std::uint64_t, std::uint64_t>& shapes_by_target,
                            const std::map<std::uint64_t, std::uint64_t>& rep_owner) {
    auto [lo, hi] = shapes_by_target.equal_range(usage);
    for (auto it = lo; it != hi; ++it) {
      const std::uint64_t pds = it->second;
      for (const auto& [id, e] : es) {
        const EntityPart* cdsr = e.part("CONTEXT_DEPENDENT_SHAPE_REPRESENTATION");
        if (cdsr == nullptr || ref_id(cdsr->params, 1) != pds) continue;
        const EntityInstance* rel = get(es, cdsr->params[0]);
        if (rel == nullptr) continue;
        std::optional<std::uint64_t> rep1, rep2, idt;
        if (const auto* rr = rel->part("REPRESENTATION_RELATIONSHIP")) {
          rep1 = ref_id(rr->params, 2);
          rep2 = ref_id(rr->params, 3);
        }
        if (const auto* rt = rel->part("REPRESENTATION_RELATIONSHIP_WITH_TRANSFORMATION")) {
          if (rt->params.size() == 1) {
            idt = ref_id(rt->params, 0);
          } else {
            rep1 = ref_id(rt->params, 2);
            rep2 = ref_id(rt->params, 3);
            idt = ref_id(rt->params, 4);
          }
        }
        if (!idt) continue;
        const auto& t = es.at(*idt);
        const EntityPart* ip = t.part("ITEM_DEFINED_TRANSFORMATION");
        if (ip == nullptr || ip->params.size() < 4) {
          model.notes.push_back("#" + std::to_string(usage) + ": unsupported transformation #" + std::to_string(*idt) +
                                "; using identity");
          return Transform::identity();
        }
        const EntityInstance* i1 = get(es, ip->params[2]);
        const EntityInstance* i2 = get(es, ip->params[3]);
        if (i1 == nullptr || i2 == nullptr || !i1->is("AXIS2_PLACEMENT_3D") || !i2->is("AXIS2_PLACEMENT_3D")) {
          model.notes.push_back("#" + std::to_string(usage) + ": transformation items are not placements; using identity");
          return Transform::identity();
        }
        const Transform a1 = a2p3d(*i1);
        const Transform a2 = a2p3d(*i2);
        auto owner = [&](std::optional<std::uint64_t> rep) -> std::optional<std::uint64_t> {
          if (!rep) return std::nullopt;
          auto o = rep_owner.find(*rep);
          return o == rep_owner.end() ? std::nullopt : std::optional(o->second);
        };
        // item_1 lives in rep_1; the transform carries rep_1 into rep_2
        const Transform forward = compose_transforms(std::vector<Transform>{a1.inverse(), a2});
        if (owner(rep1) == parent && owner(rep2) == child) return forward.inverse();
        if (owner(rep1) != child) {
          model.notes.push_back("#" + std::to_string(usage) + ": could not tell which representation is the child's; "
                                "assuming rep_1");
        }
        return forward;
      }
    }
    model.notes.push_back("#" + std::to_string(usage) + ": no placement found; using identity");
    return Transform::identity();
  }

  void check_acyclic(const std::map<std::uint64_t, std::size_t>& index) {
    enum Mark { kNone, kActive, kDone };
    std::map<std::uint64_t, Mark> mark;
    std::vector<std::uint64_t> path;
    std::function<void(std::uint64_t)> visit = [&](std::uint64_t id) {
      mark[id] = kActive;
      path.push_back(id);
      for (const auto& c : model.products[index.at(id)].children) {
        if (mark[c.child] == kActive) {
          std::string cycle;
          auto start = std::find(path.begin(), path.end(), c.child);
          for (auto it = start; it != path.end(); ++it) cycle += model.products[index.at(*it)].name + " -> ";
          throw Error(Errc::kCyclicAssembly, "assembly cycle: " + cycle + model.products[index.at(c.child)].name);
        }
        if (mark[c.child] == kNone) visit(c.child);
      }
      path.pop_back();
      mark[id] = kDone;
    };
    for (const auto& [id, _] : index) {
      if (mark[id] == kNone) visit(id);
    }
  }
};

void extend_with(const StepModel& m, const ProductNode& node, const Transform& to_root, bool children, Aabb& box) {
  for (const auto& p : node.points) box.extend(to_root.apply(p));
  if (!children) return;
  for (const auto& c : node.children) {
    const Transform t = compose_transforms(std::vector<Transform>{c.transform, to_root});
    extend_with(m, m.product(c.child), t, true, box);
  }
}

}  // namespace

const ProductNode& StepModel::product(std::uint64_t id) const {
  for (const auto& p : products) {
    if (p.id == id) return p;
  }
  throw Error(Errc::kUnknownProduct, "no PRODUCT #" + std::to_string(id));
}

const ProductNode& StepModel::product_named(std::string_view name) const {
  const ProductNode* hit = nullptr;
  for (const auto& p : products) {
    if (p.name != name) continue;
    if (hit != nullptr) throw Error(Errc::kDuplicateName, "several products are named '" + std::string(name) + "'");
    hit = &p;
  }
  if (hit == nullptr) throw Error(Errc::kUnknownProduct, "no product named '" + std::string(name) + "'");
  return *hit;
}

std::vector<std::uint64_t> StepModel::roots() const {
  std::set<std::uint64_t> used;
  for (const auto& p : products) {
    for (const auto& c : p.children) used.insert(c.child);
  }
  std::vector<std::uint64_t> out;
  for (const auto& p : products) {
    if (!used.contains(p.id)) out.push_back(p.id);
  }
  return out;
}

Transform StepModel::placement(std::uint64_t id) const {
  product(id);
  std::optional<Transform> found;
  std::function<void(std::uint64_t, const Transform&)> walk = [&](std::uint64_t at, const Transform& t) {
    if (found) return;
    if (at == id) {
      found = t;
      return;
    }
    for (const auto& c : product(at).children) walk(c.child, compose_transforms(std::vector<Transform>{c.transform, t}));
  };
  for (auto r : roots()) walk(r, Transform::identity());
  return found.value_or(Transform::identity());
}

StepModel parse_step(std::string_view bytes) {
  StepModel model;
  model.file = parse_part21(bytes);
  Lifter{model.file.entities, model}.run();
  return model;
}

StepModel load_step(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open STEP file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_step(buf.str());
}

Aabb compute_aabb(const StepModel& model, std::uint64_t product, bool include_children) {
  Aabb box;
  extend_with(model, model.product(product), Transform::identity(), include_children, box);
  return box;
}

}  // namespace dthread::geom
