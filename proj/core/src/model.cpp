#include "uvkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "uvkit/error.hpp"
#include "uvkit/random.hpp"

namespace uvkit {

using ad::Matrix;
using ad::SparseMatrix;
using ad::Tape;
using ad::Var;

namespace {

enum class InitKind { weight, bias, gain };

struct TensorSpec {
  std::string name;
  int rows = 0;
  int cols = 0;
  InitKind kind = InitKind::weight;
  bool head = false;
};

struct FeatureBlock {
  const char* name;
  int in;
  int width;
};

std::vector<FeatureBlock> feature_blocks(const ModelConfig& c) {
  return {{"uv", 2, c.embed_uv},
          {"position", 3, c.embed_position},
          {"normal", 3, c.embed_normal},
          {"curvature", 1, c.embed_curvature},
          {"degree", 1, c.embed_degree}};
}

std::vector<TensorSpec> layout(const ModelConfig& c) {
  std::vector<TensorSpec> out;
  auto add = [&](std::string name, int r, int k, InitKind kind, bool head = false) {
    out.push_back({std::move(name), r, k, kind, head});
  };
  for (const auto& f : feature_blocks(c)) {
    const std::string p = std::string("resm.") + f.name + ".";
    add(p + "w1", f.in, f.width, InitKind::weight);
    add(p + "b1", 1, f.width, InitKind::bias);
    add(p + "w2", f.width, f.width, InitKind::weight);
    add(p + "b2", 1, f.width, InitKind::bias);
    add(p + "proj", f.in, f.width, InitKind::weight);
  }
  const int g = c.graph_width;
  for (int l = 0; l < c.graph_layers; ++l) {
    const std::string p = "sage." + std::to_string(l) + ".";
    const int in = l == 0 ? c.embed_total() : g;
    add(p + "self", in, g, InitKind::weight);
    add(p + "neigh", in, g, InitKind::weight);
    add(p + "bias", 1, g, InitKind::bias);
  }
  for (int l = 0; l < c.encoder_layers; ++l) {
    const std::string p = "enc." + std::to_string(l) + ".";
    add(p + "ln1.gain", 1, g, InitKind::gain);
    add(p + "ln1.bias", 1, g, InitKind::bias);
    add(p + "wq", g, g, InitKind::weight);
    add(p + "wk", g, g, InitKind::weight);
    add(p + "wv", g, g, InitKind::weight);
    add(p + "wo", g, g, InitKind::weight);
    add(p + "bo", 1, g, InitKind::bias);
    add(p + "ln2.gain", 1, g, InitKind::gain);
    add(p + "ln2.bias", 1, g, InitKind::bias);
    add(p + "ffn.w1", g, c.ffn_width, InitKind::weight);
    add(p + "ffn.b1", 1, c.ffn_width, InitKind::bias);
    add(p + "ffn.w2", c.ffn_width, g, InitKind::weight);
    add(p + "ffn.b2", 1, g, InitKind::bias);
  }
  if (c.encoder_layers > 0) {
    add("enc.ln.gain", 1, g, InitKind::gain);
    add("enc.ln.bias", 1, g, InitKind::bias);
  }
  for (const char* stage : {"down1", "down2", "up1", "up0"}) {
    add(std::string("dec.") + stage + ".w", g, g, InitKind::weight);
    add(std::string("dec.") + stage + ".b", 1, g, InitKind::bias);
  }
  add("head.w", g, 2, InitKind::weight, true);
  add("head.b", 1, 2, InitKind::bias, true);
  return out;
}

RefinerParams allocate(const ModelConfig& config) {
  config.validate();
  RefinerParams p;
  p.config = config;
  for (const auto& s : layout(config)) {
    p.names.push_back(s.name);
    p.tensors.push_back(Matrix::Zero(s.rows, s.cols));
  }
  return p;
}

std::shared_ptr<const SparseMatrix> make_sparse(int rows, int cols,
                                                const std::vector<Eigen::Triplet<double>>& trips) {
  auto m = std::make_shared<SparseMatrix>(rows, cols);
  m->setFromTriplets(trips.begin(), trips.end());
  return m;
}

// Rows pick every other entry of `order`; the result's row r is entry 2r.
std::shared_ptr<const SparseMatrix> stride_select(const std::vector<int>& order, int cols) {
  std::vector<Eigen::Triplet<double>> t;
  const int rows = (static_cast<int>(order.size()) + 1) / 2;
  for (int r = 0; r < rows; ++r) t.emplace_back(r, order[2 * r], 1.0);
  return make_sparse(rows, cols, t);
}

// Inverse of stride_select: even positions copy their coarse entry, odd
// positions average the two coarse neighbours.
std::shared_ptr<const SparseMatrix> stride_upsample(const std::vector<int>& order, int rows) {
  std::vector<Eigen::Triplet<double>> t;
  const int n = static_cast<int>(order.size());
  const int coarse = (n + 1) / 2;
  for (int i = 0; i < n; ++i) {
    if (i % 2 == 0) {
      t.emplace_back(order[i], i / 2, 1.0);
    } else if ((i + 1) / 2 < coarse) {
      t.emplace_back(order[i], (i - 1) / 2, 0.5);
      t.emplace_back(order[i], (i + 1) / 2, 0.5);
    } else {
      t.emplace_back(order[i], (i - 1) / 2, 1.0);
    }
  }
  return make_sparse(rows, coarse, t);
}

struct Network {
  Tape tape;
  std::vector<Var> params;
  std::unordered_map<std::string, int> index;
  Var trunk;
  Var out;
  bool pyramid_skipped = false;

  Var p(const std::string& name) const { return params[index.at(name)]; }
};

Var linear(Network& net, Var x, const std::string& w, const std::string& b) {
  return net.tape.add_row(net.tape.matmul(x, net.p(w)), net.p(b));
}

Var attention(Network& net, Var x, const std::string& pre, int heads) {
  Tape& t = net.tape;
  const Var q = t.matmul(x, net.p(pre + "wq"));
  const Var k = t.matmul(x, net.p(pre + "wk"));
  const Var v = t.matmul(x, net.p(pre + "wv"));
  const int width = static_cast<int>(t.value(q).cols());
  const int dh = width / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> outs;
  for (int h = 0; h < heads; ++h) {
    const Var qh = t.slice_cols(q, h * dh, dh);
    const Var kh = t.slice_cols(k, h * dh, dh);
    const Var vh = t.slice_cols(v, h * dh, dh);
    const Var a = t.softmax_rows(t.scale(t.matmul_nt(qh, kh), scale));
    outs.push_back(t.matmul(a, vh));
  }
  const Var cat = heads == 1 ? outs[0] : t.concat_cols(outs);
  return t.add_row(t.matmul(cat, net.p(pre + "wo")), net.p(pre + "bo"));
}

// Self-attention restricted to consecutive Morton-order blocks.
Var blocked_attention(Network& net, Var x, const std::string& pre, int heads, const FeaturePack& pack,
                      int window) {
  const int n = pack.num_vertices();
  if (n <= window) return attention(net, x, pre, heads);
  Tape& t = net.tape;
  Var total{};
  for (int start = 0; start < n; start += window) {
    const int len = std::min(window, n - start);
    std::vector<Eigen::Triplet<double>> sel;
    std::vector<Eigen::Triplet<double>> scatter;
    for (int r = 0; r < len; ++r) {
      sel.emplace_back(r, pack.morton_order[start + r], 1.0);
      scatter.emplace_back(pack.morton_order[start + r], r, 1.0);
    }
    const Var xb = t.spmm(make_sparse(len, n, sel), x);
    const Var ob = t.spmm(make_sparse(n, len, scatter), attention(net, xb, pre, heads));
    total = start == 0 ? ob : t.add(total, ob);
  }
  return total;
}

Network build(const RefinerParams& params, const FeaturePack& pack, bool full) {
  const ModelConfig& c = params.config;
  const int n = pack.num_vertices();
  if (n < 1) throw_input("refiner: empty feature pack");
  Network net;
  Tape& t = net.tape;
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    net.index.emplace(params.names[i], static_cast<int>(i));
    net.params.push_back(t.leaf(params.tensors[i]));
  }

  const Matrix* inputs[] = {&pack.uv, &pack.position, &pack.normal, &pack.curvature, &pack.degree};
  std::vector<Var> embedded;
  const auto blocks = feature_blocks(c);
  for (std::size_t f = 0; f < blocks.size(); ++f) {
    const std::string pre = std::string("resm.") + blocks[f].name + ".";
    const Var x = t.constant(*inputs[f]);
    const Var h = t.silu(linear(net, x, pre + "w1", pre + "b1"));
    const Var e = linear(net, h, pre + "w2", pre + "b2");
    embedded.push_back(t.add(e, t.matmul(x, net.p(pre + "proj"))));
  }
  Var h = t.concat_cols(embedded);

  for (int l = 0; l < c.graph_layers; ++l) {
    const std::string pre = "sage." + std::to_string(l) + ".";
    const Var agg = t.spmm(pack.mean_adjacency, h);
    const Var z = t.add_row(t.add(t.matmul(h, net.p(pre + "self")), t.matmul(agg, net.p(pre + "neigh"))),
                            net.p(pre + "bias"));
    const Var act = t.silu(z);
    h = l == 0 ? act : t.add(h, act);
  }
  net.trunk = h;
  if (!full) return net;

  Var x = h;
  for (int l = 0; l < c.encoder_layers; ++l) {
    const std::string pre = "enc." + std::to_string(l) + ".";
    const Var n1 = t.layer_norm(x, net.p(pre + "ln1.gain"), net.p(pre + "ln1.bias"));
    x = t.add(x, blocked_attention(net, n1, pre, c.heads, pack, c.attention_window));
    const Var n2 = t.layer_norm(x, net.p(pre + "ln2.gain"), net.p(pre + "ln2.bias"));
    const Var f1 = t.silu(linear(net, n2, pre + "ffn.w1", pre + "ffn.b1"));
    x = t.add(x, linear(net, f1, pre + "ffn.w2", pre + "ffn.b2"));
  }
  if (c.encoder_layers > 0) x = t.layer_norm(x, net.p("enc.ln.gain"), net.p("enc.ln.bias"));

  Var y = x;
  if (n >= 4) {
    const std::vector<int>& order0 = pack.morton_order;
    const int n1 = (n + 1) / 2;
    std::vector<int> order1(n1);
    std::iota(order1.begin(), order1.end(), 0);
    const Var d1 = t.silu(linear(net, t.spmm(stride_select(order0, n), x), "dec.down1.w", "dec.down1.b"));
    const Var d2 = t.silu(linear(net, t.spmm(stride_select(order1, n1), d1), "dec.down2.w", "dec.down2.b"));
    const Var u1 = t.silu(linear(net, t.add(t.spmm(stride_upsample(order1, n1), d2), d1), "dec.up1.w", "dec.up1.b"));
    y = t.silu(linear(net, t.add(t.spmm(stride_upsample(order0, n), u1), x), "dec.up0.w", "dec.up0.b"));
  } else {
    net.pyramid_skipped = true;
  }
  net.out = t.tanh(linear(net, y, "head.w", "head.b"));
  return net;
}

void check_pack(const RefinerParams& params, const FeaturePack& pack) {
  const int n = pack.num_vertices();
  if (pack.position.rows() != n || pack.normal.rows() != n || pack.degree.rows() != n ||
      pack.curvature.rows() != n || !pack.mean_adjacency || pack.mean_adjacency->rows() != n ||
      static_cast<int>(pack.morton_order.size()) != n) {
    throw_input("refiner: inconsistent feature pack");
  }
  if (params.tensors.size() != params.names.size()) throw_invariant("refiner: parameter table mismatch");
}

}  // namespace

ModelConfig ModelConfig::scaled(int divisor) {
  if (divisor < 1) throw_input("width divisor must be positive");
  ModelConfig c;
  c.width_divisor = divisor;
  auto div = [&](int w) { return std::max(1, w / divisor); };
  c.embed_uv = div(128);
  // The reference position width is 64; 62 would not divide evenly.
  c.embed_position = div(64);
  c.embed_normal = div(32);
  c.embed_curvature = div(32);
  c.embed_degree = div(32);
  c.graph_width = div(512);
  c.graph_layers = 5;
  c.heads = std::max(1, std::min(8, 16 / divisor));
  while (c.graph_width % c.heads != 0) --c.heads;
  c.encoder_layers = std::max(2, 8 / divisor);
  c.ffn_width = 2 * c.graph_width;
  return c;
}

void ModelConfig::validate() const {
  if (embed_uv < 1 || embed_position < 1 || embed_normal < 1 || embed_curvature < 1 || embed_degree < 1)
    throw_input("model: embedding widths must be positive");
  if (graph_width < 1 || graph_layers < 1) throw_input("model: need at least one graph layer");
  if (encoder_layers < 0 || ffn_width < 1) throw_input("model: invalid encoder shape");
  if (heads < 1 || graph_width % heads != 0) throw_input("model: heads must divide the graph width");
  if (attention_window < 1) throw_input("model: attention window must be positive");
}

FeatureStats compute_feature_stats(std::span<const Chart* const> charts) {
  double sd = 0, sdd = 0, sc = 0, scc = 0;
  std::size_t count = 0;
  for (const Chart* chart : charts) {
    const auto attrs = compute_attributes(chart->positions, chart->faces);
    for (int i = 0; i < chart->num_vertices(); ++i) {
      const double d = attrs.degree[i];
      const double k = attrs.curvature[i];
      sd += d;
      sdd += d * d;
      sc += k;
      scc += k * k;
      ++count;
    }
  }
  FeatureStats s;
  if (count == 0) return s;
  const double n = static_cast<double>(count);
  s.degree_mean = sd / n;
  s.curvature_mean = sc / n;
  const double vd = std::max(0.0, sdd / n - s.degree_mean * s.degree_mean);
  const double vc = std::max(0.0, scc / n - s.curvature_mean * s.curvature_mean);
  s.degree_std = vd > 1e-12 ? std::sqrt(vd) : 1.0;
  s.curvature_std = vc > 1e-12 ? std::sqrt(vc) : 1.0;
  return s;
}

std::size_t RefinerParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += static_cast<std::size_t>(t.size());
  return n;
}

bool RefinerParams::all_finite() const {
  return std::all_of(tensors.begin(), tensors.end(), [](const Matrix& m) { return m.allFinite(); });
}

const Matrix& RefinerParams::get(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return tensors[i];
  }
  throw_input("unknown parameter '" + name + "'");
}

RefinerParams init_params(const ModelConfig& config, std::uint64_t seed, const FeatureStats& stats) {
  RefinerParams p = allocate(config);
  p.stats = stats;
  Rng rng(seed);
  const auto specs = layout(config);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    Matrix& m = p.tensors[i];
    switch (specs[i].kind) {
      case InitKind::bias:
        break;
      case InitKind::gain:
        m.setOnes();
        break;
      case InitKind::weight: {
        double s = 1.0 / std::sqrt(static_cast<double>(specs[i].rows));
        if (specs[i].head) s *= config.head_init_scale;
        for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = s * rng.normal();
        break;
      }
    }
  }
  return p;
}

RefinerParams zero_params(const ModelConfig& config) { return allocate(config); }

std::vector<int> morton_order(std::span<const Vec2> uv) {
  const int n = static_cast<int>(uv.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (n == 0) return order;
  Vec2 lo = uv[0];
  Vec2 hi = uv[0];
  for (const Vec2& q : uv) {
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  const Vec2 ext = hi - lo;
  auto spread = [](std::uint32_t v) {
    std::uint64_t x = v;
    x = (x | (x << 16)) & 0x0000FFFF0000FFFFull;
    x = (x | (x << 8)) & 0x00FF00FF00FF00FFull;
    x = (x | (x << 4)) & 0x0F0F0F0F0F0F0F0Full;
    x = (x | (x << 2)) & 0x3333333333333333ull;
    x = (x | (x << 1)) & 0x5555555555555555ull;
    return x;
  };
  auto quant = [](double c, double l, double e) {
    if (e <= 0.0) return std::uint32_t{0};
    const double t = std::clamp((c - l) / e, 0.0, 1.0);
    return static_cast<std::uint32_t>(std::lround(t * 65535.0));
  };
  std::vector<std::uint64_t> code(n);
  for (int i = 0; i < n; ++i) {
    code[i] = spread(quant(uv[i].x(), lo.x(), ext.x())) | (spread(quant(uv[i].y(), lo.y(), ext.y())) << 1);
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) { return code[a] != code[b] ? code[a] < code[b] : a < b; });
  return order;
}

FeaturePack make_feature_pack(const Chart& chart, std::span<const Vec2> q_init, const FeatureStats& stats) {
  const int n = chart.num_vertices();
  if (static_cast<int>(q_init.size()) != n) throw_input("feature pack: uv count does not match chart");
  FeaturePack pack;
  pack.uv = to_matrix(q_init);
  const Aabb3 box = bounding_box(chart.positions);
  const Vec3 centre = 0.5 * (box.min + box.max);
  double scale = box.extent().maxCoeff();
  if (!(scale > 0.0)) scale = 1.0;
  const auto attrs = compute_attributes(chart.positions, chart.faces);
  pack.position.resize(n, 3);
  pack.normal.resize(n, 3);
  pack.degree.resize(n, 1);
  pack.curvature.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    pack.position.row(i) = ((chart.positions[i] - centre) / scale).transpose();
    pack.normal.row(i) = attrs.normal[i].transpose();
    pack.degree(i, 0) = (attrs.degree[i] - stats.degree_mean) / stats.degree_std;
    pack.curvature(i, 0) = (attrs.curvature[i] - stats.curvature_mean) / stats.curvature_std;
  }
  pack.neighbors = vertex_neighbors(n, chart.faces);
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < n; ++i) {
    const auto& nb = pack.neighbors[i];
    for (int j : nb) trips.emplace_back(i, j, 1.0 / static_cast<double>(nb.size()));
  }
  pack.mean_adjacency = make_sparse(n, n, trips);
  pack.morton_order = morton_order(q_init);
  const bool finite = pack.uv.allFinite() && pack.position.allFinite() && pack.normal.allFinite() &&
                      pack.degree.allFinite() && pack.curvature.allFinite();
  if (!finite) throw_numerical("feature pack contains non-finite values");
  return pack;
}

ForwardResult forward(const RefinerParams& params, const FeaturePack& pack) {
  check_pack(params, pack);
  Network net = build(params, pack, true);
  return {net.tape.value(net.out), net.pyramid_skipped};
}

Matrix trunk_features(const RefinerParams& params, const FeaturePack& pack) {
  check_pack(params, pack);
  Network net = build(params, pack, false);
  return net.tape.value(net.trunk);
}

BackwardResult forward_backward(const RefinerParams& params, const FeaturePack& pack,
                                const std::function<Matrix(const Matrix&)>& loss_grad) {
  check_pack(params, pack);
  Network net = build(params, pack, true);
  BackwardResult r;
  r.forward = {net.tape.value(net.out), net.pyramid_skipped};
  const Matrix seed = loss_grad(r.forward.offsets);
  if (seed.rows() != pack.num_vertices() || seed.cols() != 2)
    throw_input("refiner backward: gradient must be N×2");
  if (!seed.allFinite()) throw_numerical("refiner backward: non-finite loss gradient");
  net.tape.backward(net.out, seed);
  r.grads.reserve(net.params.size());
  for (Var v : net.params) r.grads.push_back(net.tape.grad(v));
  return r;
}

BackwardResult backward(const RefinerParams& params, const FeaturePack& pack, const Matrix& d_offsets) {
  return forward_backward(params, pack, [&](const Matrix&) { return d_offsets; });
}

Matrix to_matrix(std::span<const Vec2> pts) {
  Matrix m(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  return m;
}

std::vector<Vec2> to_points(const Matrix& m) {
  std::vector<Vec2> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m.row(i).transpose();
  return out;
}

}  // namespace uvkit
