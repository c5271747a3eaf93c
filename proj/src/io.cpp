#include "pcrf/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <unordered_map>

#include "pcrf/error.hpp"

namespace pcrf {

namespace {

class CsvReader {
 public:
  CsvReader(const std::string& path, std::initializer_list<std::string_view> header) : path_(path), in_(path) {
    if (!in_) throw DataError("cannot open " + path);
    if (!next()) throw DataError(path + ": empty file");
    if (fields_.size() != header.size() || !std::equal(header.begin(), header.end(), fields_.begin()))
      fail("unexpected header");
  }

  bool next() {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (!line_.empty() && line_.back() == '\r') line_.pop_back();
      if (line_.empty()) continue;
      fields_.clear();
      std::size_t start = 0;
      for (;;) {
        const auto comma = line_.find(',', start);
        fields_.push_back(std::string_view(line_).substr(start, comma == std::string::npos ? comma : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      return true;
    }
    return false;
  }

  void expect_fields(std::size_t n) const {
    if (fields_.size() != n)
      fail("expected " + std::to_string(n) + " fields, found " + std::to_string(fields_.size()));
  }

  std::string_view field(std::size_t k) const { return fields_[k]; }
  std::string text(std::size_t k) const { return std::string(fields_[k]); }

  double number(std::size_t k, const char* name) const {
    double v = 0.0;
    const auto f = fields_[k];
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v))
      fail(std::string("bad ") + name + " '" + std::string(f) + "'");
    return v;
  }

  int integer(std::size_t k, const char* name) const {
    int v = 0;
    const auto f = fields_[k];
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size()) fail(std::string("bad ") + name + " '" + std::string(f) + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw DataError(path_ + ":" + std::to_string(line_no_) + ": " + why);
  }

 private:
  std::string path_;
  std::ifstream in_;
  std::string line_;
  std::size_t line_no_ = 0;
  std::vector<std::string_view> fields_;
};

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const char* header) : path_(path), out_(std::fopen(path.c_str(), "wb")) {
    if (out_ == nullptr) throw DataError("cannot write " + path);
    std::fprintf(out_, "%s\n", header);
  }
  ~CsvWriter() {
    if (out_ != nullptr) std::fclose(out_);
  }
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  template <typename... Args>
  void row(const char* fmt, Args... args) {
    std::fprintf(out_, fmt, args...);
  }

  void close() {
    const bool bad = std::ferror(out_) != 0;
    std::fclose(out_);
    out_ = nullptr;
    if (bad) throw DataError("write failed: " + path_);
  }

 private:
  std::string path_;
  std::FILE* out_;
};

NodeId resolve(const CsvReader& r, const Roster& roster, std::size_t k) {
  const auto v = roster.find(r.text(k));
  if (!v) r.fail("unknown node '" + r.text(k) + "'");
  return *v;
}

}  // namespace

void write_tracking_csv(const std::string& path, const std::vector<Episode>& episodes) {
  CsvWriter w(path, "episode_id,frame,time_s,team,player_id,x_m,y_m");
  for (const auto& ep : episodes) {
    const int n = ep.roster.n_players();
    for (int f = 0; f < ep.n_frames; ++f) {
      const int frame = ep.native_frame(f);
      const double t = ep.time_of(f);
      for (NodeId p = 0; p < n; ++p) {
        const Vec2 q = ep.position(f, p);
        w.row("%s,%d,%.4f,%s,%s,%.4f,%.4f\n", ep.id.c_str(), frame, t, std::string(to_string(ep.roster.team_of(p))).c_str(),
              ep.roster.player_ids[static_cast<std::size_t>(p)].c_str(), q.x, q.y);
      }
      if (!ep.ball.empty() && ep.ball[static_cast<std::size_t>(f)]) {
        const Vec2 b = *ep.ball[static_cast<std::size_t>(f)];
        w.row("%s,%d,%.4f,,ball,%.4f,%.4f\n", ep.id.c_str(), frame, t, b.x, b.y);
      }
    }
  }
  w.close();
}

std::vector<Episode> read_tracking_csv(const std::string& path, double rate_hz, int n_out) {
  if (!(rate_hz > 0.0)) throw ConfigError("tracking rate must be positive");
  CsvReader r(path, {"episode_id", "frame", "time_s", "team", "player_id", "x_m", "y_m"});

  struct Sample {
    int frame;
    double time;
    Vec2 pos;
  };
  struct Raw {
    std::vector<std::string> home, away;
    std::unordered_map<std::string, std::vector<Sample>> tracks;
    std::vector<Sample> ball;
    int first = 0, last = 0;
    bool any = false;
    double first_time = 0.0;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, Raw> raw;

  while (r.next()) {
    r.expect_fields(7);
    const std::string id = r.text(0);
    if (id.empty()) r.fail("empty episode_id");
    const int frame = r.integer(1, "frame");
    const double time = r.number(2, "time_s");
    const std::string player = r.text(4);
    const Sample s{frame, time, {r.number(5, "x_m"), r.number(6, "y_m")}};
    auto [it, fresh] = raw.try_emplace(id);
    if (fresh) order.push_back(id);
    Raw& e = it->second;
    if (!e.any || frame < e.first) {
      e.first = frame;
      e.first_time = time;
    }
    if (!e.any || frame > e.last) e.last = frame;
    e.any = true;
    if (player == "ball") {
      e.ball.push_back(s);
      continue;
    }
    if (player.empty()) r.fail("empty player_id");
    const auto team = r.field(3);
    auto& track = e.tracks[player];
    if (track.empty()) {
      if (team == "home")
        e.home.push_back(player);
      else if (team == "away")
        e.away.push_back(player);
      else
        r.fail("team must be home or away, found '" + std::string(team) + "'");
    } else {
      const bool listed_home = std::find(e.home.begin(), e.home.end(), player) != e.home.end();
      if ((team == "home") != listed_home) r.fail("player '" + player + "' changes team");
    }
    track.push_back(s);
  }
  if (order.empty()) throw DataError(path + ": no tracking rows");

  std::vector<Episode> out;
  for (const auto& id : order) {
    const Raw& e = raw.at(id);
    Episode ep;
    ep.id = id;
    ep.rate_hz = rate_hz;
    ep.native_rate_hz = rate_hz;
    ep.first_frame = e.first;
    ep.start_time_s = e.first_time;
    ep.n_frames = e.last - e.first + 1;
    ep.roster.n_home = static_cast<int>(e.home.size());
    ep.roster.n_away = static_cast<int>(e.away.size());
    ep.roster.n_out = n_out;
    ep.roster.player_ids = e.home;
    ep.roster.player_ids.insert(ep.roster.player_ids.end(), e.away.begin(), e.away.end());
    const int n = ep.roster.n_players();
    const double nan = std::nan("");
    ep.positions.assign(static_cast<std::size_t>(ep.n_frames) * static_cast<std::size_t>(n), Vec2{nan, nan});
    for (NodeId p = 0; p < n; ++p) {
      const auto& track = e.tracks.at(ep.roster.player_ids[static_cast<std::size_t>(p)]);
      for (const auto& s : track) {
        const auto k = static_cast<std::size_t>(s.frame - e.first) * static_cast<std::size_t>(n) + static_cast<std::size_t>(p);
        if (!std::isnan(ep.positions[k].x))
          throw DataError(path + ": episode '" + id + "' player '" + ep.roster.player_ids[static_cast<std::size_t>(p)] +
                          "' appears twice at frame " + std::to_string(s.frame));
        if (std::abs((s.time - e.first_time) - (s.frame - e.first) / rate_hz) > 0.5 / rate_hz)
          throw DataError(path + ": episode '" + id + "' frame " + std::to_string(s.frame) + " time " +
                          std::to_string(s.time) + " s does not match a " + std::to_string(rate_hz) + " Hz grid");
        ep.positions[k] = s.pos;
      }
    }
    for (std::size_t k = 0; k < ep.positions.size(); ++k)
      if (std::isnan(ep.positions[k].x))
        throw DataError(path + ": episode '" + id + "' has no position for player '" +
                        ep.roster.player_ids[k % static_cast<std::size_t>(n)] + "' at frame " +
                        std::to_string(e.first + static_cast<int>(k / static_cast<std::size_t>(n))));
    if (!e.ball.empty()) {
      ep.ball.assign(static_cast<std::size_t>(ep.n_frames), std::nullopt);
      for (const auto& s : e.ball) ep.ball[static_cast<std::size_t>(s.frame - e.first)] = s.pos;
    }
    out.push_back(std::move(ep));
  }
  return out;
}

void write_touches_csv(const std::string& path, const std::vector<Episode>& episodes) {
  CsvWriter w(path, "episode_id,frame,time_s,player_id,kind");
  for (const auto& ep : episodes)
    for (const auto& t : ep.touches)
      w.row("%s,%d,%.4f,%s,%s\n", ep.id.c_str(), ep.native_frame(t.frame), t.time_s, ep.roster.node_name(t.node).c_str(),
            std::string(to_string(t.kind)).c_str());
  w.close();
}

void read_touches_csv(const std::string& path, std::vector<Episode>& episodes) {
  CsvReader r(path, {"episode_id", "frame", "time_s", "player_id", "kind"});
  std::unordered_map<std::string, Episode*> by_id;
  for (auto& ep : episodes) {
    by_id[ep.id] = &ep;
    ep.touches.clear();
  }
  while (r.next()) {
    r.expect_fields(5);
    const auto it = by_id.find(r.text(0));
    if (it == by_id.end()) r.fail("episode '" + r.text(0) + "' has no tracking data");
    Episode& ep = *it->second;
    const int frame = r.integer(1, "frame");
    const double time = r.number(2, "time_s");
    const auto kind = touch_kind_from_string(r.field(4));
    if (!kind) r.fail("kind must be touch or out_of_play, found '" + r.text(4) + "'");
    const NodeId node = resolve(r, ep.roster, 3);
    if ((*kind == TouchKind::touch) != (node < ep.roster.n_players()))
      r.fail(*kind == TouchKind::touch ? "touch by a boundary" : "out_of_play must name a boundary");
    // Source frames map onto the episode grid (rates can differ after resampling).
    const double native = ep.native_rate_hz > 0.0 ? ep.native_rate_hz : ep.rate_hz;
    const int rel = static_cast<int>(std::lround((frame - ep.first_frame) * ep.rate_hz / native));
    if (rel < 0 || rel >= ep.n_frames) r.fail("frame " + std::to_string(frame) + " is outside the episode");
    ep.touches.push_back({time, rel, node, *kind});
  }
  for (auto& ep : episodes)
    std::stable_sort(ep.touches.begin(), ep.touches.end(),
                     [](const TouchRecord& a, const TouchRecord& b) { return a.time_s < b.time_s; });
}

void write_paths_csv(const std::string& path, const std::vector<PathRecord>& paths) {
  CsvWriter w(path, "episode_id,step,sender_id,receiver_id");
  for (const auto& rec : paths) {
    const int n = rec.roster->n_nodes();
    for (std::size_t t = 0; t < rec.path.size(); ++t)
      w.row("%s,%zu,%s,%s\n", rec.episode_id.c_str(), t, rec.roster->node_name(rec.path[t] / n).c_str(),
            rec.roster->node_name(rec.path[t] % n).c_str());
  }
  w.close();
}

std::map<std::string, PossessionPath> read_paths_csv(const std::string& path,
                                                     const std::map<std::string, const Roster*>& rosters) {
  CsvReader r(path, {"episode_id", "step", "sender_id", "receiver_id"});
  std::map<std::string, PossessionPath> out;
  while (r.next()) {
    r.expect_fields(4);
    const auto it = rosters.find(r.text(0));
    if (it == rosters.end()) r.fail("unknown episode '" + r.text(0) + "'");
    auto& p = out[it->first];
    if (r.integer(1, "step") != static_cast<int>(p.size())) r.fail("steps must be consecutive from 0");
    const Roster& roster = *it->second;
    p.push_back(resolve(r, roster, 2) * roster.n_nodes() + resolve(r, roster, 3));
  }
  return out;
}

void write_events_csv(const std::string& path, const std::vector<EventSet>& sets) {
  CsvWriter w(path, "episode_id,step,time_s,kind,actor_id,target_id,x_m,y_m");
  for (const auto& set : sets)
    for (const auto& e : set.events)
      w.row("%s,%d,%.4f,%s,%s,%s,%.4f,%.4f\n", set.episode_id.c_str(), e.step, e.time_s,
            std::string(to_string(e.kind)).c_str(), set.roster->node_name(e.actor).c_str(),
            e.target >= 0 ? set.roster->node_name(e.target).c_str() : "", e.location.x, e.location.y);
  w.close();
}

std::map<std::string, std::vector<EventRecord>> read_events_csv(const std::string& path,
                                                                const std::map<std::string, const Roster*>& rosters) {
  CsvReader r(path, {"episode_id", "step", "time_s", "kind", "actor_id", "target_id", "x_m", "y_m"});
  std::map<std::string, std::vector<EventRecord>> out;
  while (r.next()) {
    r.expect_fields(8);
    const auto it = rosters.find(r.text(0));
    if (it == rosters.end()) r.fail("unknown episode '" + r.text(0) + "'");
    const Roster& roster = *it->second;
    EventRecord e;
    e.step = r.integer(1, "step");
    e.time_s = r.number(2, "time_s");
    const auto kind = event_kind_from_string(r.field(3));
    if (!kind) r.fail("unknown event kind '" + r.text(3) + "'");
    e.kind = *kind;
    e.actor = resolve(r, roster, 4);
    if (!r.field(5).empty()) e.target = resolve(r, roster, 5);
    e.location = {r.number(6, "x_m"), r.number(7, "y_m")};
    out[it->first].push_back(e);
  }
  return out;
}

}  // namespace pcrf
