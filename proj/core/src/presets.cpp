#include <map>

#include "parsim/scenario.hpp"

namespace parsim {

namespace {

struct Preset {
  const char* description;
  const char* json;
};

const std::map<std::string, Preset, std::less<>>& presets() {
  static const std::map<std::string, Preset, std::less<>> table = {
      {"calm",
       {"Quiet month; baseline redemptions paid from deposits",
        R"json({
  "name": "calm",
  "horizon_days": 30,
  "unit": {
    "cents_per_unit": 10000
  },
  "agents": {
    "banks": [
      {
        "name": "bank_a",
        "reserves": 300,
        "capital": 100
      }
    ],
    "dealers": [
      {
        "name": "dealer_a",
        "capital": 80,
        "assets": 1000,
        "reserves": 50,
        "inventory": {
          "bill": 200,
          "long": 300
        }
      }
    ],
    "issuers": [
      {
        "name": "coin_a",
        "bank": "bank_a",
        "assets": 1050,
        "allocations": {
          "deposits": 250,
          "bills": 500,
          "long": 0,
          "repo": 300,
          "other": 0
        },
        "repo": {
          "counterparty": "dealer_a",
          "haircut": 0.02,
          "term_days": 7
        }
      }
    ],
    "holders": [
      {
        "name": "holder_a",
        "bank": "bank_a",
        "deposits": 100,
        "coins": {
          "coin_a": 1000
        }
      }
    ],
    "treasury_buyers": [
      {
        "name": "fund_a",
        "bank": "bank_a",
        "deposits": 500,
        "bills": 100,
        "long": 100
      }
    ]
  }
})json"}},
      {"march2020",
       {"Dash-for-cash replay: 216-unit long sale against 72.5 units of dealer headroom",
        R"json({
  "name": "march2020",
  "horizon_days": 10,
  "unit": {
    "cents_per_unit": 10000
  },
  "agents": {
    "banks": [
      {
        "name": "bank_a",
        "reserves": 600,
        "capital": 100
      }
    ],
    "dealers": [
      {
        "name": "dealer_a",
        "capital": 50,
        "assets": 963.75,
        "reserves": 50,
        "inventory": {
          "bill": 300,
          "long": 400
        }
      },
      {
        "name": "dealer_b",
        "capital": 50,
        "assets": 963.75,
        "reserves": 50,
        "inventory": {
          "bill": 300,
          "long": 400
        }
      }
    ],
    "issuers": [
      {
        "name": "coin_a",
        "bank": "bank_a",
        "assets": 1050,
        "allocations": {
          "deposits": 250,
          "bills": 500,
          "long": 0,
          "repo": 300,
          "other": 0
        },
        "repo": {
          "counterparty": "dealer_a",
          "haircut": 0.02,
          "term_days": 7
        }
      }
    ],
    "holders": [
      {
        "name": "holder_a",
        "bank": "bank_a",
        "deposits": 100,
        "coins": {
          "coin_a": 1000
        }
      }
    ],
    "treasury_buyers": [
      {
        "name": "fund_seller",
        "bank": "bank_a",
        "deposits": 50,
        "bills": 0,
        "long": 216,
        "cash_lender": false
      },
      {
        "name": "mmf_a",
        "bank": "bank_a",
        "deposits": 800,
        "bills": 100,
        "long": 0
      }
    ]
  },
  "market": {
    "depth": 40000,
    "impact_coeff": 1.0,
    "long_impact_multiplier": 2.0,
    "flight_to_safety": true,
    "flight_bid": 0.0005,
    "max_dislocation": 0.1
  },
  "exogenous_sales": [
    {
      "day": 1,
      "seller": "fund_seller",
      "class": "long",
      "amount": 216
    }
  ]
})json"}},
      {"slr_bottleneck",
       {"Dealers pinned at the SLR bound; treasury sales cannot clear",
        R"json({
  "name": "slr_bottleneck",
  "horizon_days": 15,
  "unit": {
    "cents_per_unit": 10000
  },
  "agents": {
    "banks": [
      {
        "name": "bank_a",
        "reserves": 300,
        "capital": 100
      }
    ],
    "dealers": [
      {
        "name": "dealer_a",
        "capital": 50,
        "assets": 1000,
        "reserves": 50,
        "inventory": {
          "bill": 200,
          "long": 300
        }
      },
      {
        "name": "dealer_b",
        "capital": 50,
        "assets": 1000,
        "reserves": 50,
        "inventory": {
          "bill": 200,
          "long": 300
        }
      }
    ],
    "issuers": [
      {
        "name": "coin_a",
        "bank": "bank_a",
        "assets": 1005,
        "allocations": {
          "deposits": 5,
          "bills": 700,
          "long": 300,
          "repo": 0,
          "other": 0
        }
      }
    ],
    "holders": [
      {
        "name": "holder_a",
        "bank": "bank_a",
        "deposits": 100,
        "coins": {
          "coin_a": 1000
        }
      }
    ],
    "treasury_buyers": [
      {
        "name": "fund_a",
        "bank": "bank_a",
        "deposits": 500,
        "bills": 100,
        "long": 100
      }
    ]
  },
  "policies": {
    "srf": false
  },
  "run_model": {
    "baseline_rate": 0.02,
    "shifted_rate": 0.05
  }
})json"}},
      {"paxos_incident",
       {"Erroneous mint burned the same day; brief dip, then par",
        R"json({
  "name": "paxos_incident",
  "horizon_days": 15,
  "unit": {
    "cents_per_unit": 10000
  },
  "agents": {
    "banks": [
      {
        "name": "bank_a",
        "reserves": 300,
        "capital": 100
      }
    ],
    "dealers": [
      {
        "name": "dealer_a",
        "capital": 80,
        "assets": 1000,
        "reserves": 50,
        "inventory": {
          "bill": 200,
          "long": 300
        }
      }
    ],
    "issuers": [
      {
        "name": "coin_a",
        "bank": "bank_a",
        "assets": 1050,
        "allocations": {
          "deposits": 250,
          "bills": 500,
          "long": 0,
          "repo": 300,
          "other": 0
        },
        "repo": {
          "counterparty": "dealer_a",
          "haircut": 0.02,
          "term_days": 7
        },
        "chains": [
          "eth"
        ]
      }
    ],
    "holders": [
      {
        "name": "holder_a",
        "bank": "bank_a",
        "deposits": 100,
        "coins": {
          "coin_a": 1000
        }
      },
      {
        "name": "mint_recipient",
        "bank": "bank_a",
        "deposits": 0
      }
    ],
    "treasury_buyers": [
      {
        "name": "fund_a",
        "bank": "bank_a",
        "deposits": 500,
        "bills": 100,
        "long": 100
      }
    ]
  },
  "shocks": [
    {
      "id": "mint_error",
      "class": "UncontrolledSupply",
      "likelihood": "Moderate",
      "systemic": "Low",
      "issuer": "coin_a",
      "recipient": "mint_recipient",
      "magnitude": 3000,
      "price_effect": 0.005,
      "day": 3,
      "duration": 0
    }
  ]
})json"}},
      {"regime_shift",
       {"Confidence shock of 300bp flips holders into the run regime",
        R"json({
  "name": "regime_shift",
  "horizon_days": 20,
  "unit": {
    "cents_per_unit": 10000
  },
  "agents": {
    "banks": [
      {
        "name": "bank_a",
        "reserves": 600,
        "capital": 100
      }
    ],
    "dealers": [
      {
        "name": "dealer_a",
        "capital": 80,
        "assets": 1000,
        "reserves": 50,
        "inventory": {
          "bill": 200,
          "long": 300
        }
      }
    ],
    "issuers": [
      {
        "name": "coin_a",
        "bank": "bank_a",
        "assets": 1050,
        "allocations": {
          "deposits": 450,
          "bills": 300,
          "long": 0,
          "repo": 300,
          "other": 0
        },
        "repo": {
          "counterparty": "dealer_a",
          "haircut": 0.02,
          "term_days": 7
        }
      }
    ],
    "holders": [
      {
        "name": "holder_a",
        "bank": "bank_a",
        "deposits": 100,
        "coins": {
          "coin_a": 1000
        }
      }
    ],
    "treasury_buyers": [
      {
        "name": "fund_a",
        "bank": "bank_a",
        "deposits": 500,
        "bills": 100,
        "long": 100
      }
    ]
  },
  "shocks": [
    {
      "id": "rumor",
      "class": "ConfidenceOnly",
      "likelihood": "Moderate",
      "systemic": "Low",
      "issuer": "coin_a",
      "magnitude": 0.03,
      "day": 5,
      "duration": 1
    }
  ]
})json"}},
      {"usdc_svb",
       {"Intermediated issuer hit by a high-band confidence shock; corridor buybacks",
        R"json({
  "name": "usdc_svb",
  "seed": 2023,
  "horizon_days": 20,
  "unit": {
    "cents_per_unit": 10000
  },
  "agents": {
    "banks": [
      {
        "name": "bank_a",
        "reserves": 600,
        "capital": 150
      }
    ],
    "dealers": [
      {
        "name": "dealer_a",
        "capital": 80,
        "assets": 1000,
        "reserves": 50,
        "inventory": {
          "bill": 200,
          "long": 300
        }
      }
    ],
    "issuers": [
      {
        "name": "coin_a",
        "bank": "bank_a",
        "assets": 1050,
        "allocations": {
          "deposits": 400,
          "bills": 350,
          "long": 0,
          "repo": 300,
          "other": 0
        },
        "repo": {
          "counterparty": "dealer_a",
          "haircut": 0.02,
          "term_days": 7
        },
        "access": "intermediated",
        "eligible": [
          "mm_a"
        ],
        "par_policy": {
          "mode": "corridor",
          "corridor_bp": 50,
          "supply_response": 1
        }
      }
    ],
    "intermediaries": [
      {
        "name": "mm_a",
        "bank": "bank_a",
        "deposits": 300,
        "behavior": "redeem"
      }
    ],
    "holders": [
      {
        "name": "holder_a",
        "bank": "bank_a",
        "deposits": 100,
        "coins": {
          "coin_a": 1000
        }
      }
    ],
    "treasury_buyers": [
      {
        "name": "fund_a",
        "bank": "bank_a",
        "deposits": 500,
        "bills": 100,
        "long": 100
      }
    ]
  },
  "shocks": [
    {
      "id": "bank_run",
      "class": "ConfidenceOnly",
      "likelihood": "Least",
      "systemic": "High",
      "issuer": "coin_a",
      "day": 3,
      "duration": 3
    }
  ]
})json"}},
      {"surge",
       {"Two-thirds of coins redeemed against March-2020-scale dealer headroom",
        R"json({
  "name": "surge",
  "horizon_days": 10,
  "unit": {
    "cents_per_unit": 10000
  },
  "agents": {
    "banks": [
      {
        "name": "bank_a",
        "reserves": 1500,
        "capital": 100
      }
    ],
    "dealers": [
      {
        "name": "dealer_a",
        "capital": 50,
        "assets": 963.75,
        "reserves": 50,
        "inventory": {
          "bill": 300,
          "long": 400
        }
      },
      {
        "name": "dealer_b",
        "capital": 50,
        "assets": 963.75,
        "reserves": 50,
        "inventory": {
          "bill": 300,
          "long": 400
        }
      }
    ],
    "issuers": [
      {
        "name": "coin_a",
        "bank": "bank_a",
        "assets": 1050,
        "chains": [
          "eth"
        ],
        "allocations": {
          "deposits": 50,
          "bills": 1000,
          "long": 0,
          "repo": 0,
          "other": 0
        }
      }
    ],
    "holders": [
      {
        "name": "holder_a",
        "bank": "bank_a",
        "deposits": 100,
        "coins": {
          "coin_a": 1000
        }
      }
    ],
    "treasury_buyers": [
      {
        "name": "mmf_a",
        "bank": "bank_a",
        "deposits": 1500,
        "bills": 100,
        "long": 0
      }
    ]
  },
  "run_model": {
    "shifted_rate": 0.6667
  },
  "shocks": [
    {
      "id": "loss_of_confidence",
      "class": "ConfidenceOnly",
      "issuer": "coin_a",
      "magnitude": 0.03,
      "day": 1,
      "duration": 1
    }
  ]
})json"}},
      {"correlated_liveness",
       {"Shared chain halts for two days; both issuers queue redemptions",
        R"json({
  "name": "correlated_liveness",
  "horizon_days": 15,
  "unit": {
    "cents_per_unit": 10000
  },
  "agents": {
    "banks": [
      {
        "name": "bank_a",
        "reserves": 600,
        "capital": 100
      }
    ],
    "dealers": [
      {
        "name": "dealer_a",
        "capital": 80,
        "assets": 1000,
        "reserves": 50,
        "inventory": {
          "bill": 300,
          "long": 400
        }
      }
    ],
    "issuers": [
      {
        "name": "coin_a",
        "bank": "bank_a",
        "assets": 1050,
        "allocations": {
          "deposits": 250,
          "bills": 500,
          "long": 0,
          "repo": 300,
          "other": 0
        },
        "repo": {
          "counterparty": "dealer_a",
          "haircut": 0.02,
          "term_days": 7
        },
        "chains": [
          "eth"
        ]
      },
      {
        "name": "coin_b",
        "bank": "bank_a",
        "assets": 450,
        "allocations": {
          "deposits": 150,
          "bills": 300,
          "long": 0,
          "repo": 0,
          "other": 0
        },
        "chains": [
          "eth",
          "sol"
        ]
      }
    ],
    "holders": [
      {
        "name": "holder_a",
        "bank": "bank_a",
        "deposits": 100,
        "coins": {
          "coin_a": 1000,
          "coin_b": 400
        }
      }
    ],
    "treasury_buyers": [
      {
        "name": "fund_a",
        "bank": "bank_a",
        "deposits": 500,
        "bills": 100,
        "long": 100
      }
    ]
  },
  "shocks": [
    {
      "id": "halt",
      "class": "CorrelatedLiveness",
      "likelihood": "Least",
      "systemic": "High",
      "chain": "eth",
      "day": 3,
      "duration": 2
    }
  ],
  "chains": [
    {
      "id": "eth",
      "attack_cost": 50
    },
    {
      "id": "sol",
      "attack_cost": 20
    }
  ]
})json"}},
  };
  return table;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, p] : presets()) out.push_back(name);
  return out;
}

std::string preset_json(std::string_view name) {
  const auto it = presets().find(name);
  if (it == presets().end()) throw ValidationError("unknown preset", std::string{name});
  return it->second.json;
}

std::string preset_description(std::string_view name) {
  const auto it = presets().find(name);
  if (it == presets().end()) throw ValidationError("unknown preset", std::string{name});
  return it->second.description;
}

}  // namespace parsim
