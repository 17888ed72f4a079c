#include "lodin/parser.hpp"

#include <cctype>
#include <set>
#include <unordered_map>

namespace lodin::ir {

namespace {

enum class Tok : std::uint8_t { Word, Local, GlobalSym, Int, Punct, Attr, Meta, Str, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 0;
  int col = 0;
};

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$' ||
         c == '-';
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto adv = [&](std::size_t n = 1) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto read_name = [&](std::size_t from) {
    std::size_t j = from;
    if (j < src.size() && src[j] == '"') {
      ++j;
      while (j < src.size() && src[j] != '"')
        ++j;
      if (j >= src.size())
        throw ParseError(line, col, "unterminated quoted name");
      return std::string(src.substr(from + 1, j - from - 1));
    }
    while (j < src.size() && is_name_char(src[j]))
      ++j;
    return std::string(src.substr(from, j - from));
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == ';') {
      while (i < src.size() && src[i] != '\n')
        adv();
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      adv();
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (c == '%' || c == '@') {
      const bool quoted = i + 1 < src.size() && src[i + 1] == '"';
      std::string name = read_name(i + 1);
      if (name.empty())
        throw ParseError(line, col, std::string("expected name after '") + c + "'");
      t.kind = c == '%' ? Tok::Local : Tok::GlobalSym;
      t.text = std::string(1, c) + name;
      adv(1 + name.size() + (quoted ? 2 : 0));
    } else if (c == '#' || c == '!') {
      std::size_t j = i + 1;
      while (j < src.size() && is_name_char(src[j]))
        ++j;
      t.kind = c == '#' ? Tok::Attr : Tok::Meta;
      t.text = std::string(src.substr(i, j - i));
      adv(j - i);
    } else if (c == '"') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '"')
        ++j;
      if (j >= src.size())
        throw ParseError(line, col, "unterminated string");
      t.kind = Tok::Str;
      t.text = std::string(src.substr(i + 1, j - i - 1));
      adv(j + 1 - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < src.size() &&
                std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i + 1;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
        ++j;
      // A numeric block label such as `3:` is lexed as a word.
      t.kind = (j < src.size() && src[j] == ':' && c != '-') ? Tok::Word : Tok::Int;
      t.text = std::string(src.substr(i, j - i));
      adv(j - i);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && is_name_char(src[j]))
        ++j;
      t.kind = Tok::Word;
      t.text = std::string(src.substr(i, j - i));
      adv(j - i);
    } else if (c == '.' && src.substr(i, 3) == "...") {
      t.kind = Tok::Punct;
      t.text = "...";
      adv(3);
    } else if (std::string_view("=,()[]{}*:<>").find(c) != std::string_view::npos) {
      t.kind = Tok::Punct;
      t.text = std::string(1, c);
      adv();
    } else {
      throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

const std::set<std::string> kSkipWords = {
    "dso_local", "dso_preemptable", "local_unnamed_addr", "unnamed_addr", "internal",
    "private", "external", "linkonce_odr", "weak", "common", "hidden", "protected",
    "noundef", "nonnull", "signext", "zeroext", "inreg", "nocapture", "readonly",
    "writeonly", "nounwind", "noinline", "optnone", "uwtable", "norecurse", "willreturn",
    "nofree", "nosync", "readnone", "mustprogress", "returned", "noalias", "tail",
    "musttail", "notail", "fastcc", "ccc", "immarg", "volatile", "inbounds", "nuw",
    "nsw", "exact", "dereferenceable", "align", "thread_local", "constant_expr"};

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Module run() {
    while (!at_end()) {
      const Token& t = peek();
      if (t.kind == Tok::Word && t.text == "define") {
        parse_function(false);
      } else if (t.kind == Tok::Word && t.text == "declare") {
        parse_function(true);
      } else if (t.kind == Tok::GlobalSym && peek(1).text == "=") {
        parse_global();
      } else if (t.kind == Tok::Local && peek(1).text == "=" && peek(2).text == "type") {
        parse_named_type();
      } else if (t.kind == Tok::Word || t.kind == Tok::Attr || t.kind == Tok::Meta) {
        // target, source_filename, attributes and metadata lines carry nothing we use.
        skip_line();
      } else {
        fail(t, "unexpected token '" + t.text + "' at top level");
      }
    }
    if (mod_.functions.empty() && mod_.globals.empty())
      throw ParseError(1, 1, "no module");
    return std::move(mod_);
  }

private:
  // ---- token helpers
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at_end() const { return peek().kind == Tok::End; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size())
      ++pos_;
    return t;
  }
  [[noreturn]] static void fail(const Token& t, const std::string& msg) {
    throw ParseError(t.line, t.col, msg);
  }
  bool accept(const std::string& text) {
    if (peek().text == text && peek().kind != Tok::Str) {
      next();
      return true;
    }
    return false;
  }
  const Token& expect(const std::string& text) {
    if (peek().text != text)
      fail(peek(), "expected '" + text + "', found '" + describe(peek()) + "'");
    return next();
  }
  static std::string describe(const Token& t) { return t.kind == Tok::End ? "end of input" : t.text; }
  void skip_line() {
    const int line = peek().line;
    while (!at_end() && peek().line == line)
      next();
  }
  void skip_words() {
    for (;;) {
      const Token& t = peek();
      if (t.kind == Tok::Word && kSkipWords.count(t.text)) {
        next();
        if ((t.text == "align" || t.text == "dereferenceable") && peek().kind == Tok::Int)
          next();
        if (t.text == "dereferenceable" && peek().text == "(") {
          while (!at_end() && next().text != ")") {
          }
        }
        continue;
      }
      if (t.kind == Tok::Attr) {
        next();
        continue;
      }
      break;
    }
  }
  /// Skips `, align N` and `, !dbg !N` tails.
  void skip_trailing() {
    while (peek().text == ",") {
      const Token& n1 = peek(1);
      if (n1.kind == Tok::Word && n1.text == "align") {
        next();
        next();
        if (peek().kind == Tok::Int)
          next();
      } else if (n1.kind == Tok::Meta) {
        next();
        next();
        while (peek().kind == Tok::Meta)
          next();
      } else {
        break;
      }
    }
  }

  // ---- types
  bool starts_type() const {
    const Token& t = peek();
    if (t.kind == Tok::Punct && t.text == "{")
      return true;
    if (t.kind == Tok::Local)
      return mod_.named_types.count(t.text) > 0;
    if (t.kind != Tok::Word)
      return false;
    if (t.text == "void" || t.text == "ptr")
      return true;
    return t.text.size() > 1 && t.text[0] == 'i' &&
           t.text.find_first_not_of("0123456789", 1) == std::string::npos;
  }

  Type parse_type() {
    const Token& t = next();
    Type ty;
    if (t.kind == Tok::Punct && t.text == "{") {
      std::vector<Type> elems;
      if (!accept("}")) {
        do {
          elems.push_back(parse_type());
        } while (accept(","));
        expect("}");
      }
      ty = Type::structure(std::move(elems));
    } else if (t.kind == Tok::Local) {
      auto it = mod_.named_types.find(t.text);
      if (it == mod_.named_types.end())
        fail(t, "unknown type " + t.text);
      ty = it->second;
    } else if (t.kind == Tok::Word && t.text == "void") {
      ty = Type::void_type();
    } else if (t.kind == Tok::Word && t.text == "ptr") {
      ty = Type::opaque_pointer();
    } else if (t.kind == Tok::Word && t.text.size() > 1 && t.text[0] == 'i' &&
               t.text.find_first_not_of("0123456789", 1) == std::string::npos) {
      const unsigned bits = static_cast<unsigned>(std::stoul(t.text.substr(1)));
      if (bits == 1) {
        ty = Type::integer(8);
      } else if (bits == 0 || bits % 8 != 0) {
        fail(t, "integer width must be a multiple of 8: " + t.text);
      } else {
        ty = Type::integer(bits);
      }
    } else {
      fail(t, "expected type, found '" + describe(t) + "'");
    }
    while (peek().text == "*" && peek().kind == Tok::Punct) {
      if (ty.is_void())
        fail(peek(), "pointer to void is not supported");
      next();
      ty = Type::pointer(ty);
    }
    return ty;
  }

  // ---- constants
  static std::uint64_t parse_int(const Token& t) {
    try {
      if (!t.text.empty() && t.text[0] == '-')
        return static_cast<std::uint64_t>(std::stoll(t.text));
      return std::stoull(t.text);
    } catch (const std::exception&) {
      fail(t, "integer literal out of range: " + t.text);
    }
  }

  void append_bytes(std::vector<std::uint8_t>& out, const Type& t, std::uint64_t v) {
    for (std::uint64_t k = 0; k < bsize(t); ++k)
      out.push_back(k < 8 ? static_cast<std::uint8_t>(v >> (8 * k)) : 0);
  }

  void parse_initializer(const Type& t, std::vector<std::uint8_t>& out) {
    const Token& tok = peek();
    if (tok.text == "zeroinitializer" || tok.text == "undef" || tok.text == "poison") {
      next();
      out.insert(out.end(), bsize(t), 0);
      return;
    }
    if (t.is_struct()) {
      expect("{");
      for (std::size_t i = 0; i < t.elements().size(); ++i) {
        if (i)
          expect(",");
        const Type et = parse_type();
        if (et != t.elements()[i])
          fail(tok, "initializer element type mismatch");
        parse_initializer(et, out);
      }
      expect("}");
      return;
    }
    if (tok.kind == Tok::Int) {
      append_bytes(out, t, parse_int(next()));
      return;
    }
    if (tok.text == "true" || tok.text == "false" || tok.text == "null") {
      next();
      append_bytes(out, t, tok.text == "true" ? 1 : 0);
      return;
    }
    fail(tok, "unsupported initializer '" + describe(tok) + "'");
  }

  // ---- top level
  void parse_named_type() {
    const Token& name = next();
    expect("=");
    expect("type");
    if (mod_.named_types.count(name.text))
      fail(name, "duplicate type " + name.text);
    mod_.named_types[name.text] = parse_type();
  }

  void parse_global() {
    const Token& name = next();
    expect("=");
    skip_words();
    const Token& kw = next();
    if (kw.text != "global" && kw.text != "constant")
      fail(kw, "expected 'global' or 'constant'");
    if (mod_.find_global(name.text))
      fail(name, "duplicate global " + name.text);
    Global g;
    g.name = name.text;
    g.type = parse_type();
    if (g.type.is_void())
      fail(kw, "global of void type");
    parse_initializer(g.type, g.init);
    bool zero = true;
    for (auto b : g.init)
      zero = zero && b == 0;
    if (zero)
      g.init.clear();
    skip_trailing();
    mod_.globals.push_back(std::move(g));
  }

  void parse_function(bool declaration) {
    const Token& kw = next();
    skip_words();
    while (!starts_type() && !at_end() && peek().kind == Tok::Word)
      next();
    Func f;
    f.pos = {kw.line, kw.col};
    f.is_declaration = declaration;
    f.ret_type = parse_type();
    skip_words();
    const Token& name = next();
    if (name.kind != Tok::GlobalSym)
      fail(name, "expected function name");
    f.name = name.text.substr(1);
    if (mod_.find_function(f.name))
      fail(name, "duplicate function @" + f.name);
    cur_ = &f;
    reg_by_name_.clear();
    defined_.clear();
    unnamed_ = 0;
    expect("(");
    if (!accept(")")) {
      do {
        if (peek().text == "...") {
          if (!declaration)
            fail(peek(), "varargs are only supported on declarations");
          next();
          f.is_vararg = true;
          break;
        }
        const Type pt = parse_type();
        skip_words();
        std::string pname;
        if (peek().kind == Tok::Local)
          pname = next().text;
        else
          pname = "%" + std::to_string(unnamed_++);
        if (reg_by_name_.count(pname))
          fail(peek(), "duplicate parameter " + pname);
        const RegIdx r = f.add_value_reg(pname, pt, RegKind::Param);
        reg_by_name_[pname] = r;
        defined_.insert(r);
        f.params.push_back(r);
      } while (accept(","));
      expect(")");
    }
    for (;;) {
      skip_words();
      if (peek().kind == Tok::Meta) {
        next();
        continue;
      }
      if (peek().kind == Tok::Word && (peek().text == "section" || peek().text == "comdat")) {
        next();
        if (peek().kind == Tok::Str)
          next();
        continue;
      }
      break;
    }
    if (!declaration) {
      expect("{");
      parse_body();
      expect("}");
    }
    for (const auto& [n, r] : reg_by_name_)
      if (!defined_.count(r))
        fail(name, "register " + n + " is used but never defined in @" + f.name);
    resolve_labels();
    f.assign_slots();
    cur_ = nullptr;
    mod_.functions.push_back(std::move(f));
  }

  bool at_label() const {
    return peek().kind == Tok::Word && peek(1).kind == Tok::Punct && peek(1).text == ":";
  }

  void parse_body() {
    label_uses_.clear();
    while (!at_end() && peek().text != "}") {
      std::string label;
      const Token& start = peek();
      if (at_label()) {
        label = next().text;
        next();
      } else if (cur_->blocks.empty()) {
        label = "init";
      } else {
        fail(start, "expected block label");
      }
      if (cur_->find_block(label))
        fail(start, "duplicate label " + label);
      Block b;
      b.label = label;
      cur_->blocks.push_back(std::move(b));
      const auto bi = cur_->blocks.size() - 1;
      while (!at_end() && peek().text != "}" && !at_label()) {
        Instr in = parse_instr();
        cur_->blocks[bi].instrs.push_back(std::move(in));
        if (is_terminator(cur_->blocks[bi].instrs.back().op))
          break;
      }
      if (cur_->blocks[bi].instrs.empty())
        fail(start, "block " + label + " is empty");
    }
    if (cur_->blocks.empty())
      fail(peek(), "function @" + cur_->name + " has no blocks");
  }

  BlockIdx label_ref(const Token& t) {
    if (t.kind != Tok::Local)
      fail(t, "expected label");
    label_uses_.push_back({t.text.substr(1), t});
    return -static_cast<BlockIdx>(label_uses_.size()); // patched in resolve_labels
  }

  void resolve_labels() {
    for (auto& b : cur_->blocks)
      for (auto& in : b.instrs)
        for (auto& l : in.labels) {
          if (l >= 0)
            continue;
          const auto& [name, tok] = label_uses_[static_cast<std::size_t>(-l - 1)];
          const auto bi = cur_->find_block(name);
          if (!bi)
            fail(tok, "unknown label %" + name);
          l = *bi;
        }
  }

  // ---- operands
  RegIdx use_local(const Token& t, const Type& ty) {
    auto it = reg_by_name_.find(t.text);
    if (it != reg_by_name_.end())
      return it->second;
    const RegIdx r = cur_->add_value_reg(t.text, ty);
    reg_by_name_[t.text] = r;
    return r;
  }

  RegIdx define_local(const Token& t, const Type& ty) {
    auto it = reg_by_name_.find(t.text);
    if (it != reg_by_name_.end()) {
      if (defined_.count(it->second))
        fail(t, "register " + t.text + " is defined more than once");
      // The definition fixes the register's type; earlier uses are checked later.
      cur_->regs[static_cast<std::size_t>(it->second)].type = ty;
      defined_.insert(it->second);
      return it->second;
    }
    const RegIdx r = cur_->add_value_reg(t.text, ty);
    reg_by_name_[t.text] = r;
    defined_.insert(r);
    return r;
  }

  RegIdx parse_value(const Type& ty) {
    const Token& t = peek();
    if (t.kind == Tok::Local) {
      next();
      return use_local(t, ty);
    }
    if (t.kind == Tok::Int) {
      next();
      return cur_->constant_reg(ty, parse_int(t));
    }
    if (t.kind == Tok::GlobalSym) {
      next();
      const auto g = mod_.find_global(t.text);
      if (!g)
        fail(t, "unknown global " + t.text);
      return cur_->global_reg(ty, *g, t.text);
    }
    if (t.kind == Tok::Word) {
      if (t.text == "true" || t.text == "false") {
        next();
        return cur_->constant_reg(ty, t.text == "true" ? 1 : 0);
      }
      if (t.text == "null" || t.text == "zeroinitializer" || t.text == "undef" ||
          t.text == "poison") {
        next();
        return cur_->constant_reg(ty, 0);
      }
      if (binary_from_name(t.text) || t.text == "getelementptr")
        return parse_const_expr(ty);
    }
    fail(t, "expected value, found '" + describe(t) + "'");
  }

  RegIdx parse_const_expr(const Type& ty) {
    const Token& kw = next();
    auto ex = std::make_shared<Instr>();
    ex->pos = {kw.line, kw.col};
    skip_words();
    expect("(");
    if (kw.text == "getelementptr") {
      skip_words();
      ex->op = Opcode::Gep;
      ex->type = parse_type();
      expect(",");
      const Type bt = parse_type();
      ex->ops.push_back(parse_value(bt));
      while (accept(",")) {
        const Type it = parse_type();
        ex->ops.push_back(parse_value(it));
      }
    } else {
      ex->op = *binary_from_name(kw.text);
      ex->type = parse_type();
      ex->ops.push_back(parse_value(ex->type));
      expect(",");
      const Type t2 = parse_type();
      ex->ops.push_back(parse_value(t2));
    }
    expect(")");
    RegInfo r;
    r.type = ty;
    r.kind = RegKind::ConstExpr;
    r.cexpr = std::move(ex);
    r.name = "<cexpr>";
    cur_->regs.push_back(std::move(r));
    return static_cast<RegIdx>(cur_->regs.size() - 1);
  }

  // ---- instructions
  Instr parse_instr() {
    Instr in;
    const Token& first = peek();
    in.pos = {first.line, first.col};
    const Token* result = nullptr;
    if (first.kind == Tok::Local && peek(1).text == "=") {
      result = &next();
      next();
    }
    skip_words();
    const Token& op = next();
    if (op.kind != Tok::Word)
      fail(op, "expected instruction, found '" + describe(op) + "'");
    auto need_result = [&](bool want) {
      if (want && !result)
        fail(op, std::string(op.text) + " needs a result register");
      if (!want && result)
        fail(op, std::string(op.text) + " does not produce a value");
    };
    if (auto bop = binary_from_name(op.text)) {
      need_result(true);
      in.op = *bop;
      skip_words();
      in.type = parse_type();
      in.ops.push_back(parse_value(in.type));
      expect(",");
      in.ops.push_back(parse_value(in.type));
      in.result = define_local(*result, in.type);
    } else if (op.text == "icmp") {
      need_result(true);
      in.op = Opcode::ICmp;
      const Token& p = next();
      const auto pred = pred_from_name(p.text);
      if (!pred)
        fail(p, "unknown comparison " + p.text);
      in.pred = *pred;
      in.type = parse_type();
      in.ops.push_back(parse_value(in.type));
      expect(",");
      in.ops.push_back(parse_value(in.type));
      in.result = define_local(*result, Type::integer(8));
    } else if (op.text == "alloca") {
      need_result(true);
      in.op = Opcode::Alloca;
      in.type = parse_type();
      if (peek().text == "," && peek(1).kind == Tok::Word && peek(1).text != "align" &&
          starts_type_at(1)) {
        next();
        const Type ct = parse_type();
        const Token& n = next();
        if (n.kind != Tok::Int || parse_int(n) != 1)
          fail(n, "array allocation is not supported");
        (void)ct;
      }
      skip_trailing();
      in.result = define_local(*result, Type::pointer(in.type));
    } else if (op.text == "load") {
      need_result(true);
      in.op = Opcode::Load;
      skip_words();
      Type t1 = parse_type();
      Type pt;
      if (accept(",")) {
        pt = parse_type();
      } else {
        if (!t1.is_ptr() || t1.is_opaque())
          fail(op, "load needs a result type");
        pt = t1;
        t1 = t1.pointee();
      }
      in.type = t1;
      in.ops.push_back(parse_value(pt));
      skip_trailing();
      in.result = define_local(*result, in.type);
    } else if (op.text == "store") {
      need_result(false);
      in.op = Opcode::Store;
      skip_words();
      in.type = parse_type();
      in.ops.push_back(parse_value(in.type));
      expect(",");
      const Type pt = parse_type();
      in.ops.push_back(parse_value(pt));
      skip_trailing();
    } else if (op.text == "getelementptr") {
      need_result(true);
      in.op = Opcode::Gep;
      skip_words();
      in.type = parse_type();
      expect(",");
      const Type bt = parse_type();
      in.ops.push_back(parse_value(bt));
      while (peek().text == "," && peek(1).kind != Tok::Meta) {
        next();
        const Type it = parse_type();
        in.ops.push_back(parse_value(it));
      }
      skip_trailing();
      std::vector<std::int64_t> path;
      for (std::size_t k = 2; k < in.ops.size(); ++k) {
        const auto& ri = cur_->regs[static_cast<std::size_t>(in.ops[k])];
        if (ri.kind != RegKind::Constant)
          fail(op, "struct indices of getelementptr must be constants");
        path.push_back(static_cast<std::int64_t>(ri.constant));
      }
      Type rt;
      try {
        rt = bt.is_opaque() ? Type::opaque_pointer() : Type::pointer(project(in.type, path));
      } catch (const TypeError& e) {
        fail(op, e.what());
      }
      in.result = define_local(*result, rt);
    } else if (op.text == "ret") {
      need_result(false);
      if (accept("void")) {
        in.op = Opcode::RetVoid;
        in.type = Type::void_type();
      } else {
        in.op = Opcode::Ret;
        in.type = parse_type();
        in.ops.push_back(parse_value(in.type));
      }
      skip_trailing();
    } else if (op.text == "br") {
      need_result(false);
      if (accept("label")) {
        in.op = Opcode::Br;
        in.labels.push_back(label_ref(next()));
      } else {
        in.op = Opcode::CondBr;
        in.type = parse_type();
        in.ops.push_back(parse_value(in.type));
        expect(",");
        expect("label");
        in.labels.push_back(label_ref(next()));
        expect(",");
        expect("label");
        in.labels.push_back(label_ref(next()));
      }
      skip_trailing();
    } else if (op.text == "phi") {
      need_result(true);
      in.op = Opcode::Phi;
      in.type = parse_type();
      do {
        expect("[");
        in.ops.push_back(parse_value(in.type));
        expect(",");
        in.labels.push_back(label_ref(next()));
        expect("]");
      } while (peek().text == "," && peek(1).text == "[" && (next(), true));
      skip_trailing();
      in.result = define_local(*result, in.type);
    } else if (op.text == "call") {
      in.op = Opcode::Call;
      skip_words();
      in.type = parse_type();
      if (peek().text == "(") {
        // explicit function type such as `void (...)`
        int depth = 0;
        do {
          const auto& t = next();
          if (t.text == "(")
            ++depth;
          else if (t.text == ")")
            --depth;
        } while (depth > 0 && !at_end());
      }
      const Token& callee = next();
      if (callee.kind != Tok::GlobalSym)
        fail(callee, "expected callee name");
      in.callee = callee.text.substr(1);
      expect("(");
      if (!accept(")")) {
        do {
          const Type at = parse_type();
          skip_words();
          in.ops.push_back(parse_value(at));
        } while (accept(","));
        expect(")");
      }
      while (peek().kind == Tok::Attr)
        next();
      skip_trailing();
      if (result) {
        if (in.type.is_void())
          fail(op, "call to a void function cannot have a result");
        in.result = define_local(*result, in.type);
      }
    } else if (op.text == "nondet") {
      need_result(true);
      in.op = Opcode::Nondet;
      in.type = parse_type();
      in.result = define_local(*result, in.type);
    } else {
      fail(op, "unknown opcode '" + op.text + "'");
    }
    return in;
  }

  bool starts_type_at(std::size_t k) const {
    const Token& t = peek(k);
    return t.kind == Tok::Word && t.text.size() > 1 && t.text[0] == 'i' &&
           t.text.find_first_not_of("0123456789", 1) == std::string::npos;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Module mod_;
  Func* cur_ = nullptr;
  std::unordered_map<std::string, RegIdx> reg_by_name_;
  std::set<RegIdx> defined_;
  std::vector<std::pair<std::string, Token>> label_uses_;
  int unnamed_ = 0;
};

} // namespace

Module parse_module(std::string_view text) {
  Parser p(lex(text));
  return p.run();
}

} // namespace lodin::ir
