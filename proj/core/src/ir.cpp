#include "typesift/ir.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "json_codec.hpp"

namespace typesift {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// TypeDescriptor
// ---------------------------------------------------------------------------

TypeDescriptor TypeDescriptor::primitive(std::string n) {
  TypeDescriptor t;
  t.kind = Kind::primitive;
  t.name = std::move(n);
  return t;
}

TypeDescriptor TypeDescriptor::raw_pointer(TypeDescriptor pointee, bool is_mut) {
  TypeDescriptor t;
  t.kind = Kind::raw_pointer;
  t.is_mut = is_mut;
  t.inner = std::make_shared<const TypeDescriptor>(std::move(pointee));
  return t;
}

TypeDescriptor TypeDescriptor::reference(TypeDescriptor pointee, bool is_mut) {
  TypeDescriptor t;
  t.kind = Kind::reference;
  t.is_mut = is_mut;
  t.inner = std::make_shared<const TypeDescriptor>(std::move(pointee));
  return t;
}

TypeDescriptor TypeDescriptor::slice(TypeDescriptor element) {
  TypeDescriptor t;
  t.kind = Kind::slice;
  t.inner = std::make_shared<const TypeDescriptor>(std::move(element));
  return t;
}

TypeDescriptor TypeDescriptor::array(TypeDescriptor element, std::uint64_t len) {
  TypeDescriptor t;
  t.kind = Kind::array;
  t.inner = std::make_shared<const TypeDescriptor>(std::move(element));
  t.length = len;
  return t;
}

TypeDescriptor TypeDescriptor::aggregate(std::string n) {
  TypeDescriptor t;
  t.kind = Kind::aggregate;
  t.name = std::move(n);
  return t;
}

TypeDescriptor TypeDescriptor::generic(std::string n) {
  TypeDescriptor t;
  t.kind = Kind::generic;
  t.name = std::move(n);
  return t;
}

TypeDescriptor TypeDescriptor::opaque(std::string symbol) {
  TypeDescriptor t;
  t.kind = Kind::opaque;
  t.name = std::move(symbol);
  return t;
}

const TypeDescriptor& TypeDescriptor::pointee_or_self() const {
  if (is_pointer_like() && inner) return *inner;
  return *this;
}

bool TypeDescriptor::contains_generic() const {
  if (kind == Kind::generic) return true;
  if (inner) return inner->contains_generic();
  return false;
}

std::string TypeDescriptor::canonical() const {
  switch (kind) {
    case Kind::primitive:
    case Kind::aggregate:
    case Kind::generic:
    case Kind::opaque:
      return name;
    case Kind::raw_pointer:
      return (is_mut ? "*mut " : "*const ") + (inner ? inner->canonical() : "?");
    case Kind::reference:
      return (is_mut ? "&mut " : "&") + (inner ? inner->canonical() : "?");
    case Kind::slice:
      return "[" + (inner ? inner->canonical() : "?") + "]";
    case Kind::array:
      return "[" + (inner ? inner->canonical() : "?") + "; " +
             std::to_string(length) + "]";
  }
  return "?";
}

bool operator==(const TypeDescriptor& a, const TypeDescriptor& b) {
  if (a.kind != b.kind || a.name != b.name || a.is_mut != b.is_mut ||
      a.length != b.length)
    return false;
  if (static_cast<bool>(a.inner) != static_cast<bool>(b.inner)) return false;
  if (a.inner && !(*a.inner == *b.inner)) return false;
  return true;
}

bool operator<(const TypeDescriptor& a, const TypeDescriptor& b) {
  return a.canonical() < b.canonical();
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

const std::vector<std::string>& primitive_names() {
  static const std::vector<std::string> names = {
      "bool", "char", "str",  "u8",   "u16",   "u32",   "u64", "u128", "i8",
      "i16",  "i32",  "i64",  "i128", "usize", "isize", "f32", "f64"};
  return names;
}

bool is_primitive_name(std::string_view name) {
  const auto& names = primitive_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

const std::set<std::string>& builtin_trait_names() {
  static const std::set<std::string> names = {"Copy",  "Send",    "Sync",
                                              "Sized", "'static", "Plain"};
  return names;
}

// ---------------------------------------------------------------------------
// Lookup helpers
// ---------------------------------------------------------------------------

const TypeDescriptor* FunctionIR::local_type(LocalId id) const {
  for (const auto& l : locals)
    if (l.id == id) return &l.type;
  return nullptr;
}

bool FunctionIR::has_local(LocalId id) const { return local_type(id) != nullptr; }

const FunctionIR* PackageIR::function(std::string_view fn_name) const {
  for (const auto& f : functions)
    if (f.name == fn_name) return &f;
  return nullptr;
}

const AggregateDef* resolve_aggregate(std::string_view name, const PackageIR& pkg) {
  auto it = pkg.aggregates.find(std::string(name));
  return it == pkg.aggregates.end() ? nullptr : &it->second;
}

namespace {

bool zero_sized_impl(const TypeDescriptor& ty, const PackageIR& pkg,
                     std::set<std::string>& visiting) {
  switch (ty.kind) {
    case TypeDescriptor::Kind::array:
      if (ty.length == 0) return true;
      return ty.inner && zero_sized_impl(*ty.inner, pkg, visiting);
    case TypeDescriptor::Kind::aggregate: {
      const AggregateDef* def = resolve_aggregate(ty.name, pkg);
      if (!def) return false;
      if (!visiting.insert(ty.name).second) return false;  // cyclic: give up
      bool all_zero = true;
      for (const auto& f : def->fields)
        all_zero = all_zero && zero_sized_impl(f.type, pkg, visiting);
      visiting.erase(ty.name);
      return all_zero;
    }
    default:
      return false;
  }
}

}  // namespace

bool is_zero_sized(const TypeDescriptor& ty, const PackageIR& pkg) {
  std::set<std::string> visiting;
  return zero_sized_impl(ty, pkg, visiting);
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

ParseError::ParseError(Kind kind, std::string path, const std::string& message)
    : std::runtime_error(path.empty() ? message : path + ": " + message),
      kind_(kind),
      path_(std::move(path)) {}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ParseError(ParseError::Kind::malformed_document, path, msg);
}

const json& member(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing key \"") + key + "\"");
  return *it;
}

std::string get_string(const json& j, const std::string& path, const char* key) {
  const json& v = member(j, path, key);
  if (!v.is_string()) fail(path + "/" + key, "expected a string");
  return v.get<std::string>();
}

std::uint64_t get_uint(const json& j, const std::string& path, const char* key) {
  const json& v = member(j, path, key);
  if (!v.is_number_unsigned()) fail(path + "/" + key, "expected an unsigned integer");
  return v.get<std::uint64_t>();
}

bool get_bool(const json& j, const std::string& path, const char* key,
              std::optional<bool> fallback = std::nullopt) {
  if (j.is_object()) {
    auto it = j.find(key);
    if (it != j.end()) {
      if (!it->is_boolean()) fail(path + "/" + key, "expected a boolean");
      return it->get<bool>();
    }
  }
  if (fallback) return *fallback;
  fail(path, std::string("missing key \"") + key + "\"");
}

Visibility parse_visibility(const json& j, const std::string& path, const char* key) {
  std::string v = get_string(j, path, key);
  if (v == "public") return Visibility::public_;
  if (v == "private") return Visibility::private_;
  fail(path + "/" + key, "expected \"public\" or \"private\"");
}

TypeDescriptor parse_type(const json& j, const std::string& path) {
  std::string kind = get_string(j, path, "kind");
  if (kind == "primitive") {
    std::string name = get_string(j, path, "name");
    if (!is_primitive_name(name))
      fail(path + "/name", "unknown primitive \"" + name + "\"");
    return TypeDescriptor::primitive(std::move(name));
  }
  if (kind == "raw_ptr")
    return TypeDescriptor::raw_pointer(
        parse_type(member(j, path, "pointee"), path + "/pointee"),
        get_bool(j, path, "mutable"));
  if (kind == "ref")
    return TypeDescriptor::reference(
        parse_type(member(j, path, "pointee"), path + "/pointee"),
        get_bool(j, path, "mutable"));
  if (kind == "slice")
    return TypeDescriptor::slice(
        parse_type(member(j, path, "element"), path + "/element"));
  if (kind == "array")
    return TypeDescriptor::array(
        parse_type(member(j, path, "element"), path + "/element"),
        get_uint(j, path, "length"));
  if (kind == "adt") return TypeDescriptor::aggregate(get_string(j, path, "name"));
  if (kind == "generic") return TypeDescriptor::generic(get_string(j, path, "name"));
  if (kind == "opaque") return TypeDescriptor::opaque(get_string(j, path, "symbol"));
  fail(path + "/kind", "unknown type kind \"" + kind + "\"");
}

Operand parse_operand(const json& j, const std::string& path) {
  Operand op;
  std::string mode = get_string(j, path, "mode");
  if (mode == "move")
    op.mode = OperandMode::move_;
  else if (mode == "copy")
    op.mode = OperandMode::copy_;
  else if (mode == "const")
    op.mode = OperandMode::constant;
  else
    fail(path + "/mode", "expected \"move\", \"copy\" or \"const\"");
  if (j.contains("local")) {
    Place p;
    p.local = static_cast<LocalId>(get_uint(j, path, "local"));
    p.deref = get_bool(j, path, "deref", false);
    op.place = p;
  }
  return op;
}

Rvalue parse_rvalue(const json& j, const std::string& path) {
  Rvalue rv;
  std::string kind = get_string(j, path, "kind");
  if (kind == "ref")
    rv.kind = Rvalue::Kind::ref_of;
  else if (kind == "raw_ptr")
    rv.kind = Rvalue::Kind::raw_ptr_of;
  else if (kind == "cast_ptr_to_ptr")
    rv.kind = Rvalue::Kind::cast_ptr_to_ptr;
  else if (kind == "transmute")
    rv.kind = Rvalue::Kind::transmute;
  else if (kind == "use")
    rv.kind = Rvalue::Kind::use_of;
  else
    fail(path + "/kind", "unknown rvalue kind \"" + kind + "\"");

  rv.operand = parse_operand(member(j, path, "operand"), path + "/operand");
  if (rv.kind == Rvalue::Kind::ref_of || rv.kind == Rvalue::Kind::raw_ptr_of)
    rv.is_mut = get_bool(j, path, "mutable", false);
  if (rv.kind == Rvalue::Kind::cast_ptr_to_ptr ||
      rv.kind == Rvalue::Kind::transmute) {
    rv.src_type = parse_type(member(j, path, "src_type"), path + "/src_type");
    rv.dst_type = parse_type(member(j, path, "dst_type"), path + "/dst_type");
  }
  return rv;
}

Statement parse_statement(const json& j, const std::string& path) {
  Statement st;
  std::string kind = get_string(j, path, "kind");
  if (kind == "assign") {
    st.kind = Statement::Kind::assign;
    const json& lhs = member(j, path, "lhs");
    st.lhs.local = static_cast<LocalId>(get_uint(lhs, path + "/lhs", "local"));
    st.lhs.deref = get_bool(lhs, path + "/lhs", "deref", false);
    st.rvalue = parse_rvalue(member(j, path, "rvalue"), path + "/rvalue");
  } else if (kind == "storage_dead") {
    st.kind = Statement::Kind::storage_dead;
    st.dead = static_cast<LocalId>(get_uint(j, path, "local"));
  } else {
    fail(path + "/kind", "unknown statement kind \"" + kind + "\"");
  }
  return st;
}

Terminator parse_terminator(const json& j, const std::string& path) {
  Terminator t;
  std::string kind = get_string(j, path, "kind");
  if (kind == "call") {
    t.kind = Terminator::Kind::call;
    t.callee = get_string(j, path, "callee");
    const json& args = member(j, path, "args");
    if (!args.is_array()) fail(path + "/args", "expected an array");
    for (std::size_t i = 0; i < args.size(); ++i)
      t.args.push_back(
          parse_operand(args[i], path + "/args/" + std::to_string(i)));
    t.dest = static_cast<LocalId>(get_uint(j, path, "dest"));
    t.is_unsafe_api = get_bool(j, path, "is_unsafe_api", false);
  } else if (kind == "return") {
    t.kind = Terminator::Kind::ret;
  } else if (kind == "goto") {
    t.kind = Terminator::Kind::goto_;
    t.target = static_cast<BlockId>(get_uint(j, path, "target"));
  } else {
    fail(path + "/kind", "unknown terminator kind \"" + kind + "\"");
  }
  return t;
}

FunctionIR parse_function(const json& j, const std::string& path) {
  FunctionIR fn;
  fn.name = get_string(j, path, "name");
  fn.visibility = parse_visibility(j, path, "visibility");
  if (j.contains("method_of") && !j["method_of"].is_null()) {
    if (!j["method_of"].is_string()) fail(path + "/method_of", "expected a string");
    fn.method_of = j["method_of"].get<std::string>();
  }
  fn.contains_unsafe = get_bool(j, path, "contains_unsafe", false);

  if (j.contains("generics")) {
    const json& gens = j["generics"];
    if (!gens.is_array()) fail(path + "/generics", "expected an array");
    for (std::size_t i = 0; i < gens.size(); ++i) {
      std::string gpath = path + "/generics/" + std::to_string(i);
      GenericParam gp;
      gp.name = get_string(gens[i], gpath, "name");
      const json& bounds = member(gens[i], gpath, "bounds");
      if (!bounds.is_array()) fail(gpath + "/bounds", "expected an array");
      for (const auto& b : bounds) {
        if (!b.is_string()) fail(gpath + "/bounds", "expected strings");
        gp.bounds.push_back(b.get<std::string>());
      }
      fn.generics.push_back(std::move(gp));
    }
  }

  const json& params = member(j, path, "params");
  if (!params.is_array()) fail(path + "/params", "expected an array");
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::string ppath = path + "/params/" + std::to_string(i);
    LocalDecl d;
    d.id = static_cast<LocalId>(get_uint(params[i], ppath, "local"));
    d.type = parse_type(member(params[i], ppath, "type"), ppath + "/type");
    fn.params.push_back(std::move(d));
  }

  fn.return_type = parse_type(member(j, path, "return_type"), path + "/return_type");

  const json& locals = member(j, path, "locals");
  if (!locals.is_array()) fail(path + "/locals", "expected an array");
  for (std::size_t i = 0; i < locals.size(); ++i) {
    std::string lpath = path + "/locals/" + std::to_string(i);
    LocalDecl d;
    d.id = static_cast<LocalId>(get_uint(locals[i], lpath, "id"));
    d.type = parse_type(member(locals[i], lpath, "type"), lpath + "/type");
    fn.locals.push_back(std::move(d));
  }

  const json& blocks = member(j, path, "blocks");
  if (!blocks.is_array()) fail(path + "/blocks", "expected an array");
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    std::string bpath = path + "/blocks/" + std::to_string(bi);
    BasicBlock bb;
    const json& stmts = member(blocks[bi], bpath, "statements");
    if (!stmts.is_array()) fail(bpath + "/statements", "expected an array");
    for (std::size_t si = 0; si < stmts.size(); ++si)
      bb.statements.push_back(parse_statement(
          stmts[si], bpath + "/statements/" + std::to_string(si)));
    bb.terminator =
        parse_terminator(member(blocks[bi], bpath, "terminator"), bpath + "/terminator");
    fn.blocks.push_back(std::move(bb));
  }
  return fn;
}

}  // namespace

PackageIR parse_package_unvalidated(const std::string& document) {
  json j;
  try {
    j = json::parse(document);
  } catch (const json::exception& e) {
    fail("", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("", "expected a top-level object");

  PackageIR pkg;
  pkg.name = get_string(j, "", "name");

  const json& fns = member(j, "", "functions");
  if (!fns.is_array()) fail("/functions", "expected an array");
  for (std::size_t i = 0; i < fns.size(); ++i)
    pkg.functions.push_back(
        parse_function(fns[i], "/functions/" + std::to_string(i)));

  if (j.contains("aggregates")) {
    const json& aggs = j["aggregates"];
    if (!aggs.is_object()) fail("/aggregates", "expected an object");
    for (auto it = aggs.begin(); it != aggs.end(); ++it) {
      std::string apath = "/aggregates/" + it.key();
      AggregateDef def;
      def.name = it.key();
      std::string repr = get_string(*it, apath, "representation");
      if (repr == "default")
        def.repr = AggregateRepr::default_;
      else if (repr == "c")
        def.repr = AggregateRepr::c;
      else if (repr == "transparent")
        def.repr = AggregateRepr::transparent;
      else
        fail(apath + "/representation", "expected \"default\", \"c\" or \"transparent\"");
      def.visibility = parse_visibility(*it, apath, "visibility");
      const json& fields = member(*it, apath, "fields");
      if (!fields.is_array()) fail(apath + "/fields", "expected an array");
      for (std::size_t fi = 0; fi < fields.size(); ++fi) {
        std::string fpath = apath + "/fields/" + std::to_string(fi);
        AggregateField f;
        f.name = get_string(fields[fi], fpath, "name");
        f.visibility = parse_visibility(fields[fi], fpath, "visibility");
        f.type = parse_type(member(fields[fi], fpath, "type"), fpath + "/type");
        def.fields.push_back(std::move(f));
      }
      pkg.aggregates.emplace(it.key(), std::move(def));
    }
  }

  if (j.contains("traits")) {
    const json& traits = j["traits"];
    if (!traits.is_object()) fail("/traits", "expected an object");
    for (auto it = traits.begin(); it != traits.end(); ++it) {
      std::string tpath = "/traits/" + it.key();
      TraitDef def;
      def.name = it.key();
      if (it->contains("supertraits")) {
        const json& sup = (*it)["supertraits"];
        if (!sup.is_array()) fail(tpath + "/supertraits", "expected an array");
        for (const auto& s : sup) {
          if (!s.is_string()) fail(tpath + "/supertraits", "expected strings");
          def.supertraits.push_back(s.get<std::string>());
        }
      }
      if (it->contains("implementors")) {
        const json& impl = (*it)["implementors"];
        if (!impl.is_array()) fail(tpath + "/implementors", "expected an array");
        for (std::size_t ii = 0; ii < impl.size(); ++ii)
          def.implementors.push_back(
              parse_type(impl[ii], tpath + "/implementors/" + std::to_string(ii)));
      }
      pkg.traits.emplace(it.key(), std::move(def));
    }
  }
  return pkg;
}

PackageIR parse_package(const std::string& document) {
  PackageIR pkg = parse_package_unvalidated(document);
  std::vector<Violation> violations = validate(pkg);
  if (!violations.empty()) {
    const Violation& v = violations.front();
    throw ParseError(v.dangling ? ParseError::Kind::dangling_reference
                                : ParseError::Kind::malformed_document,
                     "", v.to_string());
  }
  return pkg;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

std::string Violation::to_string() const {
  std::ostringstream os;
  if (!function.empty()) {
    os << "function " << function;
    if (block >= 0) {
      os << ", block " << block;
      if (index >= 0) os << ", statement " << index;
    }
    os << ": ";
  }
  os << message;
  return os.str();
}

namespace {

struct Checker {
  const PackageIR& pkg;
  std::vector<Violation>& out;

  void add(std::string fn, int block, int index, std::string msg,
           bool dangling = false) {
    out.push_back({std::move(fn), block, index, std::move(msg), dangling});
  }

  void check_type(const TypeDescriptor& ty, const std::string& fn, int block,
                  int index) {
    switch (ty.kind) {
      case TypeDescriptor::Kind::primitive:
        if (!is_primitive_name(ty.name))
          add(fn, block, index, "unknown primitive \"" + ty.name + "\"");
        break;
      case TypeDescriptor::Kind::aggregate:
        if (!resolve_aggregate(ty.name, pkg))
          add(fn, block, index,
              "aggregate \"" + ty.name +
                  "\" is not defined; use an opaque descriptor for externals");
        break;
      default:
        break;
    }
    if (ty.inner) check_type(*ty.inner, fn, block, index);
  }

  void check_operand(const Operand& op, const FunctionIR& f, int block,
                     int index) {
    if (op.mode == OperandMode::constant) {
      if (op.place)
        add(f.name, block, index, "constant operand must not carry a place");
      return;
    }
    if (!op.place) {
      add(f.name, block, index, "move/copy operand is missing its place");
      return;
    }
    if (!f.has_local(op.place->local))
      add(f.name, block, index,
          "operand references unknown local " + std::to_string(op.place->local),
          true);
  }

  void check_function(const FunctionIR& f) {
    std::set<LocalId> seen;
    for (const auto& l : f.locals) {
      if (!seen.insert(l.id).second)
        add(f.name, -1, -1, "duplicate local id " + std::to_string(l.id));
      check_type(l.type, f.name, -1, -1);
    }
    if (!seen.count(0))
      add(f.name, -1, -1, "missing return slot (local 0)");
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      LocalId expect = static_cast<LocalId>(i + 1);
      if (f.params[i].id != expect)
        add(f.name, -1, -1,
            "parameter " + std::to_string(i) + " must use local " +
                std::to_string(expect) + ", found " +
                std::to_string(f.params[i].id));
      const TypeDescriptor* declared = f.local_type(f.params[i].id);
      if (!declared)
        add(f.name, -1, -1,
            "parameter local " + std::to_string(f.params[i].id) +
                " is absent from the local table",
            true);
      else if (!(*declared == f.params[i].type))
        add(f.name, -1, -1,
            "parameter local " + std::to_string(f.params[i].id) +
                " disagrees with its local table entry");
      check_type(f.params[i].type, f.name, -1, -1);
    }
    check_type(f.return_type, f.name, -1, -1);

    for (std::size_t bi = 0; bi < f.blocks.size(); ++bi) {
      const BasicBlock& bb = f.blocks[bi];
      int block = static_cast<int>(bi);
      for (std::size_t si = 0; si < bb.statements.size(); ++si) {
        const Statement& st = bb.statements[si];
        int index = static_cast<int>(si);
        if (st.kind == Statement::Kind::storage_dead) {
          if (!f.has_local(st.dead))
            add(f.name, block, index,
                "storage_dead references unknown local " + std::to_string(st.dead),
                true);
          continue;
        }
        if (!f.has_local(st.lhs.local))
          add(f.name, block, index,
              "assign lhs references unknown local " + std::to_string(st.lhs.local),
              true);
        check_operand(st.rvalue.operand, f, block, index);
        bool is_conversion = st.rvalue.kind == Rvalue::Kind::cast_ptr_to_ptr ||
                             st.rvalue.kind == Rvalue::Kind::transmute;
        if (is_conversion) {
          if (!st.rvalue.src_type || !st.rvalue.dst_type)
            add(f.name, block, index,
                "conversion rvalue must carry src_type and dst_type");
          if (st.rvalue.src_type) check_type(*st.rvalue.src_type, f.name, block, index);
          if (st.rvalue.dst_type) check_type(*st.rvalue.dst_type, f.name, block, index);
        }
      }
      int term_index = static_cast<int>(bb.statements.size());
      const Terminator& t = bb.terminator;
      if (t.kind == Terminator::Kind::call) {
        if (!f.has_local(t.dest))
          add(f.name, block, term_index,
              "call destination references unknown local " + std::to_string(t.dest),
              true);
        for (const auto& a : t.args) check_operand(a, f, block, term_index);
      } else if (t.kind == Terminator::Kind::goto_) {
        if (t.target >= f.blocks.size())
          add(f.name, block, term_index,
              "goto targets unknown block " + std::to_string(t.target), true);
      }
    }
  }

  // By-value containment cycles make layout queries meaningless.
  bool agg_cycle(const std::string& name, std::set<std::string>& visiting,
                 std::set<std::string>& done) {
    if (done.count(name)) return false;
    if (!visiting.insert(name).second) return true;
    const AggregateDef* def = resolve_aggregate(name, pkg);
    bool cyclic = false;
    if (def) {
      for (const auto& f : def->fields) {
        const TypeDescriptor* ty = &f.type;
        while (ty->kind == TypeDescriptor::Kind::array && ty->inner)
          ty = ty->inner.get();
        if (ty->kind == TypeDescriptor::Kind::aggregate)
          cyclic = cyclic || agg_cycle(ty->name, visiting, done);
      }
    }
    visiting.erase(name);
    done.insert(name);
    return cyclic;
  }

  void check_definitions() {
    std::set<std::string> done;
    for (const auto& [name, def] : pkg.aggregates) {
      for (const auto& field : def.fields)
        check_type(field.type, "", -1, -1);
      std::set<std::string> visiting;
      if (agg_cycle(name, visiting, done))
        add("", -1, -1, "aggregate \"" + name + "\" contains itself by value");
      if (def.repr == AggregateRepr::transparent) {
        int sized = 0;
        for (const auto& field : def.fields)
          if (!is_zero_sized(field.type, pkg)) ++sized;
        if (sized != 1)
          add("", -1, -1,
              "transparent aggregate \"" + name +
                  "\" must have exactly one non-zero-sized field, found " +
                  std::to_string(sized));
      }
    }
    for (const auto& [name, def] : pkg.traits) {
      for (const auto& s : def.supertraits) {
        if (!pkg.traits.count(s) && !builtin_trait_names().count(s))
          add("", -1, -1,
              "trait \"" + name + "\" names unknown supertrait \"" + s + "\"");
      }
      for (const auto& impl : def.implementors) check_type(impl, "", -1, -1);
    }
  }
};

}  // namespace

std::vector<Violation> validate(const PackageIR& pkg) {
  std::vector<Violation> out;
  Checker checker{pkg, out};
  for (const auto& f : pkg.functions) checker.check_function(f);
  checker.check_definitions();
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

ordered_json type_to_json(const TypeDescriptor& ty) {
  ordered_json j;
  switch (ty.kind) {
    case TypeDescriptor::Kind::primitive:
      j["kind"] = "primitive";
      j["name"] = ty.name;
      break;
    case TypeDescriptor::Kind::raw_pointer:
      j["kind"] = "raw_ptr";
      j["mutable"] = ty.is_mut;
      j["pointee"] = ty.inner ? type_to_json(*ty.inner) : ordered_json();
      break;
    case TypeDescriptor::Kind::reference:
      j["kind"] = "ref";
      j["mutable"] = ty.is_mut;
      j["pointee"] = ty.inner ? type_to_json(*ty.inner) : ordered_json();
      break;
    case TypeDescriptor::Kind::slice:
      j["kind"] = "slice";
      j["element"] = ty.inner ? type_to_json(*ty.inner) : ordered_json();
      break;
    case TypeDescriptor::Kind::array:
      j["kind"] = "array";
      j["element"] = ty.inner ? type_to_json(*ty.inner) : ordered_json();
      j["length"] = ty.length;
      break;
    case TypeDescriptor::Kind::aggregate:
      j["kind"] = "adt";
      j["name"] = ty.name;
      break;
    case TypeDescriptor::Kind::generic:
      j["kind"] = "generic";
      j["name"] = ty.name;
      break;
    case TypeDescriptor::Kind::opaque:
      j["kind"] = "opaque";
      j["symbol"] = ty.name;
      break;
  }
  return j;
}

ordered_json operand_to_json(const Operand& op) {
  ordered_json j;
  switch (op.mode) {
    case OperandMode::move_: j["mode"] = "move"; break;
    case OperandMode::copy_: j["mode"] = "copy"; break;
    case OperandMode::constant: j["mode"] = "const"; break;
  }
  if (op.place) {
    j["local"] = op.place->local;
    j["deref"] = op.place->deref;
  }
  return j;
}

ordered_json statement_to_json(const Statement& st) {
  ordered_json j;
  if (st.kind == Statement::Kind::storage_dead) {
    j["kind"] = "storage_dead";
    j["local"] = st.dead;
    return j;
  }
  j["kind"] = "assign";
  j["lhs"] = {{"local", st.lhs.local}, {"deref", st.lhs.deref}};
  ordered_json rv;
  switch (st.rvalue.kind) {
    case Rvalue::Kind::ref_of: rv["kind"] = "ref"; break;
    case Rvalue::Kind::raw_ptr_of: rv["kind"] = "raw_ptr"; break;
    case Rvalue::Kind::cast_ptr_to_ptr: rv["kind"] = "cast_ptr_to_ptr"; break;
    case Rvalue::Kind::transmute: rv["kind"] = "transmute"; break;
    case Rvalue::Kind::use_of: rv["kind"] = "use"; break;
  }
  rv["operand"] = operand_to_json(st.rvalue.operand);
  if (st.rvalue.kind == Rvalue::Kind::ref_of ||
      st.rvalue.kind == Rvalue::Kind::raw_ptr_of)
    rv["mutable"] = st.rvalue.is_mut;
  if (st.rvalue.src_type) rv["src_type"] = type_to_json(*st.rvalue.src_type);
  if (st.rvalue.dst_type) rv["dst_type"] = type_to_json(*st.rvalue.dst_type);
  j["rvalue"] = std::move(rv);
  return j;
}

ordered_json terminator_to_json(const Terminator& t) {
  ordered_json j;
  switch (t.kind) {
    case Terminator::Kind::call: {
      j["kind"] = "call";
      j["callee"] = t.callee;
      ordered_json args = ordered_json::array();
      for (const auto& a : t.args) args.push_back(operand_to_json(a));
      j["args"] = std::move(args);
      j["dest"] = t.dest;
      j["is_unsafe_api"] = t.is_unsafe_api;
      break;
    }
    case Terminator::Kind::ret:
      j["kind"] = "return";
      break;
    case Terminator::Kind::goto_:
      j["kind"] = "goto";
      j["target"] = t.target;
      break;
  }
  return j;
}

}  // namespace

namespace detail {

TypeDescriptor parse_type_json(const nlohmann::json& j, const std::string& path) {
  return parse_type(j, path);
}

nlohmann::ordered_json type_to_json(const TypeDescriptor& ty) {
  return typesift::type_to_json(ty);
}

}  // namespace detail

std::string serialize_package(const PackageIR& pkg) {
  ordered_json j;
  j["name"] = pkg.name;
  ordered_json fns = ordered_json::array();
  for (const auto& f : pkg.functions) {
    ordered_json fj;
    fj["name"] = f.name;
    fj["visibility"] = f.visibility == Visibility::public_ ? "public" : "private";
    if (f.method_of) fj["method_of"] = *f.method_of;
    fj["contains_unsafe"] = f.contains_unsafe;
    ordered_json gens = ordered_json::array();
    for (const auto& g : f.generics)
      gens.push_back({{"name", g.name}, {"bounds", g.bounds}});
    fj["generics"] = std::move(gens);
    ordered_json params = ordered_json::array();
    for (const auto& p : f.params)
      params.push_back({{"local", p.id}, {"type", type_to_json(p.type)}});
    fj["params"] = std::move(params);
    fj["return_type"] = type_to_json(f.return_type);
    ordered_json locals = ordered_json::array();
    for (const auto& l : f.locals)
      locals.push_back({{"id", l.id}, {"type", type_to_json(l.type)}});
    fj["locals"] = std::move(locals);
    ordered_json blocks = ordered_json::array();
    for (const auto& bb : f.blocks) {
      ordered_json bj;
      ordered_json stmts = ordered_json::array();
      for (const auto& st : bb.statements) stmts.push_back(statement_to_json(st));
      bj["statements"] = std::move(stmts);
      bj["terminator"] = terminator_to_json(bb.terminator);
      blocks.push_back(std::move(bj));
    }
    fj["blocks"] = std::move(blocks);
    fns.push_back(std::move(fj));
  }
  j["functions"] = std::move(fns);

  ordered_json aggs = ordered_json::object();
  for (const auto& [name, def] : pkg.aggregates) {
    ordered_json aj;
    switch (def.repr) {
      case AggregateRepr::default_: aj["representation"] = "default"; break;
      case AggregateRepr::c: aj["representation"] = "c"; break;
      case AggregateRepr::transparent: aj["representation"] = "transparent"; break;
    }
    aj["visibility"] = def.visibility == Visibility::public_ ? "public" : "private";
    ordered_json fields = ordered_json::array();
    for (const auto& field : def.fields)
      fields.push_back(
          {{"name", field.name},
           {"visibility",
            field.visibility == Visibility::public_ ? "public" : "private"},
           {"type", type_to_json(field.type)}});
    aj["fields"] = std::move(fields);
    aggs[name] = std::move(aj);
  }
  j["aggregates"] = std::move(aggs);

  ordered_json traits = ordered_json::object();
  for (const auto& [name, def] : pkg.traits) {
    ordered_json tj;
    tj["supertraits"] = def.supertraits;
    ordered_json impls = ordered_json::array();
    for (const auto& impl : def.implementors) impls.push_back(type_to_json(impl));
    tj["implementors"] = std::move(impls);
    traits[name] = std::move(tj);
  }
  j["traits"] = std::move(traits);

  return j.dump(2) + "\n";
}

}  // namespace typesift
