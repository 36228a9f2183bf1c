import { describe, expect, it } from "vitest";

import type { RosterResponse, TriageRow } from "../src/api.ts";
import { renderApp, renderCounters, renderExplanation, renderRoster } from "../src/render.ts";
import { applyRoster, beginRequest, initialState, optimisticMark } from "../src/state.ts";

function row(user: string, group: number, risk = false, explanation: TriageRow["explanation"] = []): TriageRow {
  return { user_id: user, p: 0.9, c: 0.4, y_hat: 1, group, uu_risk: risk, explanation };
}

function stateWith(rows: TriageRow[]) {
  const s = initialState();
  const counts: Record<string, number> = { "0": 0, "1": 0, "2": 0 };
  for (const r of rows) counts[String(r.group)] = (counts[String(r.group)] ?? 0) + 1;
  const resp: RosterResponse = { delta: 0.25, counts, rows };
  applyRoster(s, beginRequest(s, 0.25), resp);
  return s;
}

export function countersFromHtml(html: string): Record<string, number> {
  const out: Record<string, number> = {};
  for (const m of html.matchAll(/data-group="(\d)" data-count="(\d+)"/g)) {
    out[m[1]!] = Number(m[2]);
  }
  return out;
}

export function badgesFromHtml(html: string): number {
  return (html.match(/class="badge uu-alert"/g) ?? []).length;
}

describe("counters", () => {
  it("renders one counter per group plus the total", () => {
    const s = stateWith([row("a", 0), row("b", 1), row("c", 2), row("d", 2)]);
    const html = renderCounters(s);
    expect(countersFromHtml(html)).toEqual({ "0": 1, "1": 1, "2": 2 });
    expect(html).toContain('data-count="4"');
  });
});

describe("roster table", () => {
  it("renders one row per student and badges only on flagged rows", () => {
    const rows = [row("a", 2, true), row("b", 0), row("c", 1)];
    const s = stateWith(rows);
    const html = renderRoster(s);
    expect((html.match(/<tr class="row/g) ?? []).length).toBe(3);
    expect(badgesFromHtml(html)).toBe(1);
  });

  it("empty roster shows an empty-state message", () => {
    const s = stateWith([]);
    expect(renderRoster(s)).toContain("empty-state");
  });

  it("marked students get a marked button", () => {
    const s = stateWith([row("a", 0)]);
    optimisticMark(s, "a", true);
    expect(renderRoster(s)).toContain("marked for help");
  });

  it("escapes user-controlled strings", () => {
    const s = stateWith([row('<img src=x onerror="1">', 0)]);
    expect(renderRoster(s)).not.toContain("<img src=x");
  });
});

describe("explanations", () => {
  it("renders entries in the order given (server sorts by |gamma| desc)", () => {
    const entries = [
      { id: "F30", gamma: -8.2, value: 0.7 },
      { id: "F10", gamma: 4.1, value: 0.2 },
      { id: "F02", gamma: 1.3, value: 0.9 },
    ];
    const html = renderExplanation(row("a", 2, true, entries));
    const ids = [...html.matchAll(/data-id="(\w+)"/g)].map((m) => m[1]);
    expect(ids).toEqual(["F30", "F10", "F02"]);
  });

  it("missing characterization explained inline", () => {
    expect(renderExplanation(row("a", 2, true))).toContain("no characterization");
  });
});

describe("error banner", () => {
  it("banner with retry appears only when there is an error", () => {
    const s = stateWith([row("a", 0)]);
    expect(renderApp(s)).not.toContain("banner error");
    s.error = "API unreachable";
    const html = renderApp(s);
    expect(html).toContain("API unreachable");
    expect(html).toContain("retry-btn");
    // the roster stays visible behind the banner (non-blocking)
    expect(html).toContain('<table class="roster"');
  });
});
