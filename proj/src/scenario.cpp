#include "powergames/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "powergames/random.hpp"

namespace powergames {

using nlohmann::json;

PowerProfile PowerProfile::zeros(int num_users, int num_subchannels) {
  PowerProfile profile;
  profile.num_users = num_users;
  profile.num_subchannels = num_subchannels;
  profile.p.assign(static_cast<std::size_t>(num_users) * num_subchannels, 0.0);
  return profile;
}

PowerProfile PowerProfile::constant(int num_users, int num_subchannels, double value) {
  PowerProfile profile = zeros(num_users, num_subchannels);
  std::fill(profile.p.begin(), profile.p.end(), value);
  return profile;
}

double& PowerProfile::at(int user, int subchannel) {
  return p[static_cast<std::size_t>(user) * num_subchannels + subchannel];
}

double PowerProfile::at(int user, int subchannel) const {
  return p[static_cast<std::size_t>(user) * num_subchannels + subchannel];
}

double PowerProfile::sup_distance(const PowerProfile& other) const {
  if (num_users != other.num_users || num_subchannels != other.num_subchannels)
    throw std::invalid_argument("PowerProfile::sup_distance: dimension mismatch");
  double d = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) d = std::max(d, std::abs(p[k] - other.p[k]));
  return d;
}

double PowerProfile::max_abs() const {
  double m = 0.0;
  for (double v : p) m = std::max(m, std::abs(v));
  return m;
}

double Scenario::g_hat(int rx, int tx, int l) const {
  return cross_gain[(static_cast<std::size_t>(rx) * num_users + tx) * num_subchannels + l];
}

double Scenario::eta_hat(int rx, int l) const {
  return noise[static_cast<std::size_t>(rx) * num_subchannels + l];
}

double& Scenario::g_hat_ref(int rx, int tx, int l) {
  return cross_gain[(static_cast<std::size_t>(rx) * num_users + tx) * num_subchannels + l];
}

double& Scenario::eta_hat_ref(int rx, int l) {
  return noise[static_cast<std::size_t>(rx) * num_subchannels + l];
}

Scenario Scenario::normalized(int num_users, int num_subchannels, std::vector<double> cross_gain,
                              std::vector<double> noise) {
  Scenario scenario;
  scenario.num_users = num_users;
  scenario.num_subchannels = num_subchannels;
  scenario.cross_gain = std::move(cross_gain);
  scenario.noise = std::move(noise);
  scenario.validate();
  return scenario;
}

Scenario Scenario::from_raw(int num_users, int num_subchannels, const std::vector<double>& gain,
                            const std::vector<double>& noise) {
  const std::size_t m = static_cast<std::size_t>(num_users);
  const std::size_t l = static_cast<std::size_t>(num_subchannels);
  if (num_users < 1 || num_subchannels < 1 || gain.size() != m * m * l || noise.size() != m * l)
    throw std::invalid_argument("Scenario::from_raw: bad dimensions");
  Scenario scenario;
  scenario.num_users = num_users;
  scenario.num_subchannels = num_subchannels;
  scenario.cross_gain.resize(m * m * l);
  scenario.noise.resize(m * l);
  for (int i = 0; i < num_users; ++i) {
    for (int s = 0; s < num_subchannels; ++s) {
      const double direct = gain[(static_cast<std::size_t>(i) * num_users + i) * l + s];
      if (!(direct > 0.0))
        throw std::invalid_argument("Scenario::from_raw: direct gains must be positive");
      for (int j = 0; j < num_users; ++j)
        scenario.g_hat_ref(i, j, s) =
            gain[(static_cast<std::size_t>(i) * num_users + j) * l + s] / direct;
      scenario.g_hat_ref(i, i, s) = 1.0;
      scenario.eta_hat_ref(i, s) = noise[static_cast<std::size_t>(i) * l + s] / direct;
    }
  }
  scenario.validate();
  return scenario;
}

void Scenario::validate() const {
  if (num_users < 1 || num_subchannels < 1)
    throw std::invalid_argument("Scenario: needs at least one user and one subchannel");
  const std::size_t m = static_cast<std::size_t>(num_users);
  const std::size_t l = static_cast<std::size_t>(num_subchannels);
  if (cross_gain.size() != m * m * l || noise.size() != m * l)
    throw std::invalid_argument("Scenario: field sizes inconsistent with dimensions");
  for (int i = 0; i < num_users; ++i) {
    for (int s = 0; s < num_subchannels; ++s) {
      if (g_hat(i, i, s) != 1.0)
        throw std::invalid_argument("Scenario: stored direct gains must be normalized to 1");
      if (!(eta_hat(i, s) > 0.0) || !std::isfinite(eta_hat(i, s)))
        throw std::invalid_argument("Scenario: noise must be strictly positive");
      for (int j = 0; j < num_users; ++j) {
        const double g = g_hat(i, j, s);
        if (!(g >= 0.0) || !std::isfinite(g))
          throw std::invalid_argument("Scenario: cross gains must be nonnegative and finite");
      }
    }
  }
}

void Scenario::check_user(int user) const {
  if (user < 0 || user >= num_users) throw std::out_of_range("user index out of range");
}

void Scenario::check_subchannel(int subchannel) const {
  if (subchannel < 0 || subchannel >= num_subchannels)
    throw std::out_of_range("subchannel index out of range");
}

void Scenario::check_profile(const PowerProfile& profile) const {
  if (profile.num_users != num_users || profile.num_subchannels != num_subchannels)
    throw std::invalid_argument("profile dimensions do not match scenario");
}

double effective_interference(const Scenario& scenario, const PowerProfile& profile, int user,
                              int subchannel) {
  scenario.check_user(user);
  scenario.check_subchannel(subchannel);
  scenario.check_profile(profile);
  double sum = scenario.eta_hat(user, subchannel);
  for (int j = 0; j < scenario.num_users; ++j) {
    if (j == user) continue;
    sum += scenario.g_hat(user, j, subchannel) * profile.at(j, subchannel);
  }
  return sum;
}

double sinr(const Scenario& scenario, const PowerProfile& profile, int user, int subchannel) {
  const double interference = effective_interference(scenario, profile, user, subchannel);
  return profile.at(user, subchannel) / interference;
}

double user_rate(const Scenario& scenario, const PowerProfile& profile, int user) {
  scenario.check_user(user);
  scenario.check_profile(profile);
  double rate = 0.0;
  for (int l = 0; l < scenario.num_subchannels; ++l)
    rate += std::log1p(sinr(scenario, profile, user, l));
  return rate;
}

Scenario generate_scenario(std::uint64_t seed, int num_users, int num_subchannels,
                           double cross_gain_ceiling, double noise_level) {
  if (num_users < 1 || num_subchannels < 1)
    throw std::invalid_argument("generate_scenario: dimensions must be positive");
  if (!(cross_gain_ceiling > 0.0) || !(noise_level > 0.0))
    throw std::invalid_argument("generate_scenario: ceiling and noise must be positive");
  const std::size_t m = static_cast<std::size_t>(num_users);
  const std::size_t l = static_cast<std::size_t>(num_subchannels);
  Scenario scenario;
  scenario.num_users = num_users;
  scenario.num_subchannels = num_subchannels;
  scenario.cross_gain.assign(m * m * l, 0.0);
  scenario.noise.assign(m * l, noise_level);
  scenario.seed = seed;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < num_users; ++i) {
    const double ceiling = cross_gain_ceiling / (i + 1);  // receivers are 1-based in the rule
    for (int j = 0; j < num_users; ++j) {
      for (int s = 0; s < num_subchannels; ++s) {
        if (i == j)
          scenario.g_hat_ref(i, i, s) = 1.0;
        else
          scenario.g_hat_ref(i, j, s) = ceiling * uniform01(rng);
      }
    }
  }
  return scenario;
}

Scenario scale_user_channels(const Scenario& scenario, int user, double factor) {
  scenario.check_user(user);
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw std::invalid_argument("scale_user_channels: factor must be positive");
  Scenario scaled = scenario;
  for (int s = 0; s < scenario.num_subchannels; ++s) {
    for (int j = 0; j < scenario.num_users; ++j)
      if (j != user) scaled.g_hat_ref(user, j, s) = scenario.g_hat(user, j, s) / factor;
    scaled.eta_hat_ref(user, s) = scenario.eta_hat(user, s) / factor;
  }
  return scaled;
}

std::string scenario_to_json(const Scenario& scenario) {
  json gains = json::array();
  for (int i = 0; i < scenario.num_users; ++i) {
    json row = json::array();
    for (int j = 0; j < scenario.num_users; ++j) {
      json channels = json::array();
      for (int l = 0; l < scenario.num_subchannels; ++l) channels.push_back(scenario.g_hat(i, j, l));
      row.push_back(std::move(channels));
    }
    gains.push_back(std::move(row));
  }
  json noise = json::array();
  for (int i = 0; i < scenario.num_users; ++i) {
    json row = json::array();
    for (int l = 0; l < scenario.num_subchannels; ++l) row.push_back(scenario.eta_hat(i, l));
    noise.push_back(std::move(row));
  }
  json doc{{"schema_version", 1},
           {"users", scenario.num_users},
           {"subchannels", scenario.num_subchannels},
           {"normalized_cross_gains", std::move(gains)},
           {"normalized_noise", std::move(noise)}};
  if (scenario.seed) doc["seed"] = *scenario.seed;
  return doc.dump(2);
}

static Scenario scenario_from_json_checked(std::string_view text) {
  const json doc = json::parse(text);
  const int m = doc.at("users").get<int>();
  const int l = doc.at("subchannels").get<int>();
  if (m < 1 || l < 1) throw std::invalid_argument("scenario JSON: bad dimensions");

  auto read_gains = [&](const json& g) {
    std::vector<double> out(static_cast<std::size_t>(m) * m * l);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int s = 0; s < l; ++s)
          out[(static_cast<std::size_t>(i) * m + j) * l + s] =
              g.at(i).at(j).at(s).get<double>();
    return out;
  };
  auto read_noise = [&](const json& nz) {
    std::vector<double> out(static_cast<std::size_t>(m) * l);
    for (int i = 0; i < m; ++i)
      for (int s = 0; s < l; ++s)
        out[static_cast<std::size_t>(i) * l + s] = nz.at(i).at(s).get<double>();
    return out;
  };

  Scenario scenario;
  if (doc.contains("normalized_cross_gains")) {
    scenario = Scenario::normalized(m, l, read_gains(doc.at("normalized_cross_gains")),
                                    read_noise(doc.at("normalized_noise")));
  } else if (doc.contains("raw_gains")) {
    // Raw input is normalized at load time.
    scenario = Scenario::from_raw(m, l, read_gains(doc.at("raw_gains")),
                                  read_noise(doc.at("raw_noise")));
  } else {
    throw std::invalid_argument(
        "scenario JSON: expected normalized_cross_gains or raw_gains");
  }
  if (doc.contains("seed")) scenario.seed = doc.at("seed").get<std::uint64_t>();
  return scenario;
}

Scenario scenario_from_json(std::string_view text) {
  try {
    return scenario_from_json_checked(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario JSON: ") + e.what());
  }
}

}  // namespace powergames
