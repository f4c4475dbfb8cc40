// Copyright 2026 The chainsdf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "chainsdf/robot_sdf.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "chainsdf/version.hpp"

namespace chainsdf::robotsdf {

namespace {

using kinematics::Pose;
using nlohmann::ordered_json;

// --- field evaluation via tensor contractions -------------------------------

// Value and normalized-coordinate gradient of <psi(p), w> for a point inside
// the domain. Contracting the weight tensor beats materializing the N^3
// feature row.
void field_interior_eval(const BernsteinField& field, const Vec3& p,
                         double* value, Vec3* grad_metric) {
  const int n = field.cfg.n_per_axis;
  const Vec3 t = field.cfg.normalize(p);
  const Vec3 inv_ext =
      (field.cfg.domain.max - field.cfg.domain.min).cwiseInverse();

  std::array<double, basis::kMaxBasisPerAxis> a, b, c, da, db, dc;
  basis::detail::bernstein_row(t[0], n, a.data());
  basis::detail::bernstein_row(t[1], n, b.data());
  basis::detail::bernstein_row(t[2], n, c.data());
  basis::detail::bernstein_grad_row(t[0], n, da.data());
  basis::detail::bernstein_grad_row(t[1], n, db.data());
  basis::detail::bernstein_grad_row(t[2], n, dc.data());

  using RowMat =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> w(field.weights.data(), n * n, n);
  Eigen::Map<const Eigen::VectorXd> cv(c.data(), n), dcv(dc.data(), n);
  Eigen::Map<const Eigen::VectorXd> av(a.data(), n), bv(b.data(), n);
  Eigen::Map<const Eigen::VectorXd> dav(da.data(), n), dbv(db.data(), n);

  const VecX wc = w * cv;    // (i,j) -> sum_k w_ijk c_k
  const VecX wdc = w * dcv;
  Eigen::Map<const RowMat> vc(wc.data(), n, n);
  Eigen::Map<const RowMat> vdc(wdc.data(), n, n);

  const VecX vcb = vc * bv;
  *value = av.dot(vcb);
  if (grad_metric) {
    (*grad_metric)[0] = dav.dot(vcb) * inv_ext[0];
    (*grad_metric)[1] = av.dot(static_cast<VecX>(vc * dbv)) * inv_ext[1];
    (*grad_metric)[2] = av.dot(static_cast<VecX>(vdc * bv)) * inv_ext[2];
  }
}

}  // namespace

LinkFieldResult link_field_eval(const BernsteinField& field,
                                const Vec3& p_local) {
  require(field.weights.size() == field.cfg.dof(),
          "link_field_eval: weight count must equal N^3");
  require(p_local.allFinite(), "link_field_eval: non-finite point");
  LinkFieldResult out;
  const AxisBox& box = field.cfg.domain;
  if (box.contains(p_local)) {
    field_interior_eval(field, p_local, &out.distance, &out.grad);
    return out;
  }
  const Vec3 proj = box.clamp(p_local);
  const Vec3 gap = p_local - proj;
  const double gap_norm = gap.norm();
  double boundary_value;
  Vec3 boundary_grad;
  field_interior_eval(field, proj, &boundary_value, &boundary_grad);
  out.distance = gap_norm + boundary_value;
  for (int i = 0; i < 3; ++i)
    out.grad[i] = (p_local[i] < box.min[i] || p_local[i] > box.max[i])
                      ? gap[i] / gap_norm
                      : boundary_grad[i];
  return out;
}

void RobotSdfModel::validate() const {
  chain.validate();
  require(!link_fields.empty(), "RobotSdfModel: no link fields attached");
  for (const auto& [frame, field] : link_fields) {
    require(frame >= 1 && frame <= chain.num_frames(),
            "RobotSdfModel: field attached to a missing frame");
    field.validate();
  }
}

std::vector<QueryResult> eval_points(const RobotSdfModel& model, const VecX& q,
                                     const PointMatrix& points,
                                     const QueryOptions& opts) {
  model.validate();
  require(points.rows() >= 1, "eval_points: needs at least one point");
  if (opts.mode == MinMode::Soft)
    require(opts.rho > 0.0, "eval_points: soft-min rho must be positive");

  const auto fk = kinematics::forward_kinematics_full(model.chain, q);
  struct LinkCtx {
    int frame;
    const BernsteinField* field;
    Pose pose;
  };
  std::vector<LinkCtx> links;
  links.reserve(model.link_fields.size());
  for (const auto& [frame, field] : model.link_fields)
    links.push_back({frame, &field, fk.frames[frame]});

  const int n_links = static_cast<int>(links.size());
  const int c = model.chain.dof();
  std::vector<QueryResult> results(points.rows());

  parallel_for(points.rows(), opts.exec, [&](std::int64_t i) {
    const Vec3 p_world = points.row(i).transpose();
    QueryResult& res = results[i];

    std::vector<double> dist(n_links);
    std::vector<Vec3> grad_local(n_links);
    int argmin = 0;
    for (int l = 0; l < n_links; ++l) {
      const Vec3 p_local = links[l].pose.apply_inverse(p_world);
      const LinkFieldResult lf = link_field_eval(*links[l].field, p_local);
      dist[l] = lf.distance;
      grad_local[l] = lf.grad;
      if (dist[l] < dist[argmin]) argmin = l;
    }
    res.link_index = links[argmin].frame;

    if (opts.mode == MinMode::Hard || n_links == 1) {
      res.distance = dist[argmin];
      res.grad_p = links[argmin].pose.rotation * grad_local[argmin];
      if (opts.want_grad_q) {
        const MatX jac = kinematics::point_frame_jacobian(
            model.chain, fk, links[argmin].frame, p_world);
        res.grad_q = jac.transpose() * grad_local[argmin];
      }
    } else {
      // Stabilized log-sum-exp around the minimum.
      const double d_min = dist[argmin];
      double z = 0.0;
      std::vector<double> wgt(n_links);
      for (int l = 0; l < n_links; ++l) {
        wgt[l] = std::exp(-opts.rho * (dist[l] - d_min));
        z += wgt[l];
      }
      res.distance = d_min - std::log(z) / opts.rho;
      res.grad_p = Vec3::Zero();
      if (opts.want_grad_q) res.grad_q = VecX::Zero(c);
      for (int l = 0; l < n_links; ++l) {
        const double wl = wgt[l] / z;
        res.grad_p += wl * (links[l].pose.rotation * grad_local[l]);
        if (opts.want_grad_q) {
          const MatX jac = kinematics::point_frame_jacobian(
              model.chain, fk, links[l].frame, p_world);
          res.grad_q += wl * (jac.transpose() * grad_local[l]);
        }
      }
    }
  });
  return results;
}

AxisBox link_domain_cube(const AxisBox& geometry_aabb, double margin_fraction,
                         double margin_min_m) {
  const AxisBox cube = geometry_aabb.cube_hull();
  const double margin =
      std::max(margin_fraction * cube.extents().maxCoeff(), margin_min_m);
  return cube.expanded(margin);
}

namespace {

AxisBox posed_aabb(const geometry::Shape& shape, const Pose& pose) {
  const AxisBox local = geometry::shape_aabb(shape);
  AxisBox out;
  out.min = Vec3::Constant(std::numeric_limits<double>::infinity());
  out.max = -out.min;
  for (int corner = 0; corner < 8; ++corner) {
    Vec3 p;
    for (int i = 0; i < 3; ++i)
      p[i] = (corner >> i) & 1 ? local.max[i] : local.min[i];
    const Vec3 w = pose.apply(p);
    out.min = out.min.cwiseMin(w);
    out.max = out.max.cwiseMax(w);
  }
  return out;
}

// Link-frame training set: surface samples through the attachment pose with
// two-scale Gaussian noise (clamped into the box), uniform box samples, and
// exact oracle labels.
void sample_link_training_set(const geometry::Shape& shape, const Pose& pose,
                              const geometry::SamplingConfig& cfg,
                              const AxisBox& box, Exec exec,
                              PointMatrix* points, VecX* distances) {
  const std::int64_t total = cfg.n_surface + cfg.n_uniform;
  points->resize(total, 3);
  distances->resize(total);

  Rng rng(cfg.seed);
  const std::int64_t n_near = cfg.n_surface / 2;
  for (std::int64_t i = 0; i < cfg.n_surface; ++i) {
    const double sigma = i < n_near ? cfg.sigma_near : cfg.sigma_far;
    const Vec3 p =
        pose.apply(geometry::sample_shape_surface(shape, rng)) +
        sigma * rng.normal3();
    points->row(i) = box.clamp(p).transpose();
  }
  for (std::int64_t i = 0; i < cfg.n_uniform; ++i)
    points->row(cfg.n_surface + i) = rng.uniform_in_box(box).transpose();

  parallel_for(total, exec, [&](std::int64_t i) {
    (*distances)[i] = geometry::shape_sdf(
        shape, pose.apply_inverse(points->row(i).transpose()));
  });
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

RobotSdfModel fit_robot(const kinematics::KinematicChain& chain,
                        const FitRobotConfig& cfg) {
  chain.validate();
  cfg.fit.validate();
  require(cfg.n_per_axis >= 2 && cfg.n_per_axis <= basis::kMaxBasisPerAxis,
          "fit_robot: n_per_axis out of range");
  require(!chain.attachments.empty(), "fit_robot: chain has no attached geometry");

  RobotSdfModel model;
  model.chain = chain;
  model.metadata.tool_version = kToolVersion;
  model.metadata.seed = cfg.seed;
  model.metadata.fit_method =
      cfg.method == FitMethod::Recursive ? "recursive" : "batch";

  std::unordered_map<std::string, VecX> fit_cache;

  for (const auto& att : chain.attachments) {
    require(!model.link_fields.count(att.frame),
            "fit_robot: multiple attachments on frame " +
                std::to_string(att.frame));
    if (geometry::shape_area(att.shape) <= 0.0)
      throw std::runtime_error("fit_robot: link " + std::to_string(att.frame) +
                               " has degenerate geometry");

    const AxisBox aabb = posed_aabb(att.shape, att.local_pose);
    const AxisBox domain =
        link_domain_cube(aabb, cfg.margin_fraction, cfg.margin_min_m);

    basis::BasisConfig bcfg;
    bcfg.n_per_axis = cfg.n_per_axis;
    bcfg.domain = domain;

    // Identical geometry + pose + config => identical samples and identical
    // weights, so the fit is shared.
    std::ostringstream key;
    key << geometry::shape_signature(att.shape) << "|";
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) key << att.local_pose.rotation(i, j) << ",";
    key << att.local_pose.translation.transpose() << "|" << cfg.n_per_axis
        << "|" << cfg.fit.lambda << "|" << cfg.fit.batch_size << "|"
        << cfg.sampling.n_surface << "|" << cfg.sampling.n_uniform << "|"
        << cfg.sampling.sigma_near << "|" << cfg.sampling.sigma_far << "|"
        << cfg.seed;

    auto it = fit_cache.find(key.str());
    VecX weights;
    if (it != fit_cache.end()) {
      weights = it->second;
    } else {
      geometry::SamplingConfig sampling = cfg.sampling;
      sampling.seed = fnv1a(key.str());
      PointMatrix pts;
      VecX dists;
      sample_link_training_set(att.shape, att.local_pose, sampling, domain,
                               cfg.exec, &pts, &dists);
      weights =
          cfg.method == FitMethod::Recursive
              ? fit::fit_recursive(pts, dists, bcfg, cfg.fit, cfg.exec)
              : fit::fit_batch(pts, dists, bcfg, cfg.fit, cfg.exec);
      fit_cache.emplace(key.str(), weights);
    }
    model.link_fields[att.frame] = BernsteinField{bcfg, weights};
    model.metadata.samples_per_link[att.frame] =
        cfg.sampling.n_surface + cfg.sampling.n_uniform;
  }
  return model;
}

AccuracyEvalResult evaluate_accuracy(const RobotSdfModel& model,
                                     const EvalAccuracyConfig& cfg) {
  model.validate();
  require(cfg.n_configs >= 1 && cfg.n_points >= 1,
          "evaluate_accuracy: counts must be positive");
  require(!model.chain.attachments.empty(),
          "evaluate_accuracy: chain carries no oracle geometry");

  const auto& atts = model.chain.attachments;
  std::vector<double> areas;
  double total_area = 0.0;
  for (const auto& att : atts) {
    areas.push_back(geometry::shape_area(att.shape));
    total_area += areas.back();
  }

  const std::int64_t total = std::int64_t(cfg.n_configs) * cfg.n_points;
  VecX predicted(total), truth(total);
  double eval_seconds = 0.0;

  Rng rng(cfg.seed);
  for (int ci = 0; ci < cfg.n_configs; ++ci) {
    Rng crng = rng.stream(ci);
    VecX q(model.chain.dof());
    for (int j = 0; j < q.size(); ++j)
      q[j] = crng.uniform(model.chain.q_min[j], model.chain.q_max[j]);

    const auto fk = kinematics::forward_kinematics_full(model.chain, q);

    // Surface-biased points plus uniform draws inside the posed domain boxes.
    PointMatrix pts(cfg.n_points, 3);
    const int n_near = static_cast<int>(cfg.near_fraction * cfg.n_points);
    for (int i = 0; i < cfg.n_points; ++i) {
      if (i < n_near) {
        double pick = crng.uniform() * total_area;
        size_t a = 0;
        for (; a + 1 < atts.size() && pick > areas[a]; ++a) pick -= areas[a];
        const Pose world_pose =
            fk.frames[atts[a].frame].compose(atts[a].local_pose);
        const Vec3 p =
            world_pose.apply(geometry::sample_shape_surface(atts[a].shape, crng)) +
            cfg.near_sigma * crng.normal3();
        pts.row(i) = p.transpose();
      } else {
        const size_t l = crng.uniform_index(model.link_fields.size());
        auto it = model.link_fields.begin();
        std::advance(it, l);
        const Vec3 local = crng.uniform_in_box(it->second.cfg.domain);
        pts.row(i) = fk.frames[it->first].apply(local).transpose();
      }
    }

    // Truth: min over the attached oracle geometry in posed frames.
    VecX t(cfg.n_points);
    parallel_for(cfg.n_points, cfg.exec, [&](std::int64_t i) {
      const Vec3 p = pts.row(i).transpose();
      double best = std::numeric_limits<double>::infinity();
      for (size_t a = 0; a < atts.size(); ++a) {
        const Pose world_pose =
            fk.frames[atts[a].frame].compose(atts[a].local_pose);
        best = std::min(best, geometry::shape_sdf(
                                  atts[a].shape, world_pose.apply_inverse(p)));
      }
      t[i] = best;
    });

    QueryOptions qopts;
    qopts.mode = cfg.mode;
    qopts.exec = cfg.exec;
    const auto t0 = std::chrono::steady_clock::now();
    const auto results = eval_points(model, q, pts, qopts);
    eval_seconds += std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();

    for (int i = 0; i < cfg.n_points; ++i) {
      predicted[std::int64_t(ci) * cfg.n_points + i] = results[i].distance;
      truth[std::int64_t(ci) * cfg.n_points + i] = t[i];
    }
  }

  AccuracyEvalResult out;
  out.report = geometry::accuracy_report(predicted, truth, cfg.near_threshold);
  out.total_queries = total;
  out.ms_per_kquery = eval_seconds * 1e6 / double(total);
  return out;
}

// --- grid file ---------------------------------------------------------------

namespace {
constexpr char kGridMagic[] = "chainsdf.grid v1";
}

void export_level_set_grid(const RobotSdfModel& model, const VecX& q,
                           const AxisBox& box, const std::array<int, 3>& res,
                           const std::string& path, const QueryOptions& opts) {
  model.validate();
  box.validate();
  for (int r : res)
    require(r >= 2, "export_level_set_grid: resolution must be >= 2 per axis");
  const std::int64_t cells =
      std::int64_t(res[0]) * res[1] * res[2];
  require(cells <= 100000000,
          "export_level_set_grid: grid exceeds 1e8 cells");

  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("export_level_set_grid: cannot open " + path);
  ordered_json header;
  header["box"] = {{"min", {box.min[0], box.min[1], box.min[2]}},
                   {"max", {box.max[0], box.max[1], box.max[2]}}};
  header["resolution"] = {res[0], res[1], res[2]};
  header["order"] = "x-slowest";
  out << kGridMagic << "\n" << header.dump() << "\n";

  // Evaluate in slabs to bound memory; payload is little-endian float32.
  const Vec3 step{(box.max[0] - box.min[0]) / (res[0] - 1),
                  (box.max[1] - box.min[1]) / (res[1] - 1),
                  (box.max[2] - box.min[2]) / (res[2] - 1)};
  const std::int64_t slab = res[1] * std::int64_t(res[2]);
  PointMatrix pts(slab, 3);
  std::vector<float> values(slab);
  for (int ix = 0; ix < res[0]; ++ix) {
    std::int64_t r = 0;
    for (int iy = 0; iy < res[1]; ++iy)
      for (int iz = 0; iz < res[2]; ++iz, ++r)
        pts.row(r) = Vec3(box.min[0] + step[0] * ix, box.min[1] + step[1] * iy,
                          box.min[2] + step[2] * iz)
                         .transpose();
    const auto results = eval_points(model, q, pts, opts);
    for (std::int64_t i = 0; i < slab; ++i)
      values[i] = static_cast<float>(results[i].distance);
    out.write(reinterpret_cast<const char*>(values.data()),
              slab * sizeof(float));
  }
  if (!out)
    throw std::runtime_error("export_level_set_grid: write failed: " + path);
}

LevelSetGrid load_level_set_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("load_level_set_grid: cannot open " + path);
  std::string magic, header_line;
  std::getline(in, magic);
  if (magic != kGridMagic)
    throw std::runtime_error("load_level_set_grid: bad magic in " + path);
  std::getline(in, header_line);
  const auto header = ordered_json::parse(header_line);
  LevelSetGrid grid;
  for (int i = 0; i < 3; ++i) {
    grid.box.min[i] = header.at("box").at("min")[i].get<double>();
    grid.box.max[i] = header.at("box").at("max")[i].get<double>();
    grid.resolution[i] = header.at("resolution")[i].get<int>();
  }
  const std::int64_t cells = std::int64_t(grid.resolution[0]) *
                             grid.resolution[1] * grid.resolution[2];
  grid.values.resize(cells);
  in.read(reinterpret_cast<char*>(grid.values.data()), cells * sizeof(float));
  if (!in)
    throw std::runtime_error("load_level_set_grid: truncated payload in " +
                             path);
  return grid;
}

// --- model file --------------------------------------------------------------

namespace {

constexpr char kB64Chars[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const unsigned char* data, size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  for (size_t i = 0; i < len; i += 3) {
    const unsigned b0 = data[i];
    const unsigned b1 = i + 1 < len ? data[i + 1] : 0;
    const unsigned b2 = i + 2 < len ? data[i + 2] : 0;
    out.push_back(kB64Chars[b0 >> 2]);
    out.push_back(kB64Chars[((b0 & 0x3) << 4) | (b1 >> 4)]);
    out.push_back(i + 1 < len ? kB64Chars[((b1 & 0xf) << 2) | (b2 >> 6)] : '=');
    out.push_back(i + 2 < len ? kB64Chars[b2 & 0x3f] : '=');
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  std::array<int, 256> lut;
  lut.fill(-1);
  for (int i = 0; i < 64; ++i) lut[static_cast<unsigned char>(kB64Chars[i])] = i;
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  int acc = 0, bits = 0;
  for (char ch : text) {
    if (ch == '=' || ch == '\n' || ch == '\r') continue;
    const int v = lut[static_cast<unsigned char>(ch)];
    if (v < 0) throw std::runtime_error("base64: invalid character");
    acc = (acc << 6) | v;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((acc >> bits) & 0xff));
    }
  }
  return out;
}

constexpr char kModelFormat[] = "chainsdf.model";

}  // namespace

std::string model_to_string(const RobotSdfModel& model) {
  model.validate();
  ordered_json j;
  j["format"] = kModelFormat;
  j["version"] = 1;
  j["flattening_order"] = "axis1-slowest";  // convention choice, see README
  ordered_json prov;
  prov["tool_version"] = model.metadata.tool_version;
  prov["fit_method"] = model.metadata.fit_method;
  prov["seed"] = model.metadata.seed;
  ordered_json spl;
  for (const auto& [frame, count] : model.metadata.samples_per_link)
    spl[std::to_string(frame)] = count;
  prov["samples_per_link"] = spl;
  j["provenance"] = prov;
  j["chain"] = ordered_json::parse(
      kinematics::chain_to_json_string(model.chain));
  j["links"] = ordered_json::array();
  for (const auto& [frame, field] : model.link_fields) {
    ordered_json l;
    l["frame"] = frame;
    l["n_per_axis"] = field.cfg.n_per_axis;
    l["domain"] = {
        {"min",
         {field.cfg.domain.min[0], field.cfg.domain.min[1],
          field.cfg.domain.min[2]}},
        {"max",
         {field.cfg.domain.max[0], field.cfg.domain.max[1],
          field.cfg.domain.max[2]}}};
    // Little-endian float64 payload.
    l["weights_b64"] = base64_encode(
        reinterpret_cast<const unsigned char*>(field.weights.data()),
        sizeof(double) * field.weights.size());
    j["links"].push_back(l);
  }
  return j.dump(2) + "\n";
}

RobotSdfModel model_from_string(const std::string& text,
                                const std::string& base_dir) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("model file: ") + e.what());
  }
  if (j.value("format", "") != kModelFormat)
    throw std::runtime_error("model file: missing 'chainsdf.model' header");
  if (j.value("version", 0) != 1)
    throw std::runtime_error("model file: unsupported version");
  if (j.value("flattening_order", "") != "axis1-slowest")
    throw std::runtime_error("model file: unknown flattening order");

  RobotSdfModel model;
  model.chain =
      kinematics::chain_from_json_string(j.at("chain").dump(), base_dir);
  const auto& prov = j.at("provenance");
  model.metadata.tool_version = prov.value("tool_version", "");
  model.metadata.fit_method = prov.value("fit_method", "");
  model.metadata.seed = prov.value("seed", std::uint64_t(0));
  if (prov.contains("samples_per_link"))
    for (const auto& [k, v] : prov.at("samples_per_link").items())
      model.metadata.samples_per_link[std::stoi(k)] = v.get<std::int64_t>();

  for (const auto& l : j.at("links")) {
    BernsteinField field;
    field.cfg.n_per_axis = l.at("n_per_axis").get<int>();
    for (int i = 0; i < 3; ++i) {
      field.cfg.domain.min[i] = l.at("domain").at("min")[i].get<double>();
      field.cfg.domain.max[i] = l.at("domain").at("max")[i].get<double>();
    }
    const auto bytes = base64_decode(l.at("weights_b64").get<std::string>());
    if (bytes.size() != sizeof(double) * size_t(field.cfg.dof()))
      throw std::runtime_error("model file: weight payload size mismatch");
    field.weights.resize(field.cfg.dof());
    std::memcpy(field.weights.data(), bytes.data(), bytes.size());
    model.link_fields[l.at("frame").get<int>()] = std::move(field);
  }
  model.validate();
  return model;
}

void save_model(const RobotSdfModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out << model_to_string(model);
}

RobotSdfModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  const auto slash = path.find_last_of('/');
  const std::string dir =
      slash == std::string::npos ? std::string(".") : path.substr(0, slash);
  return model_from_string(text, dir);
}

}  // namespace chainsdf::robotsdf
