import { describe, expect, it } from "vitest";

import type { RosterResponse, TriageRow } from "../src/api.ts";
import {
  applyError,
  applyRoster,
  badgeCount,
  beginRequest,
  clampDelta,
  commitMark,
  groupCounts,
  initialState,
  isMarked,
  optimisticMark,
  rollbackMark,
  rosterSize,
  setMarks,
  visibleRows,
} from "../src/state.ts";

function row(user: string, group: number, risk = false, p = 0.8): TriageRow {
  return {
    user_id: user,
    p,
    c: Math.abs(p - 0.5),
    y_hat: p >= 0.5 ? 1 : 0,
    group,
    uu_risk: risk,
    explanation: [],
  };
}

function roster(rows: TriageRow[], delta = 0.25): RosterResponse {
  const counts: Record<string, number> = { "0": 0, "1": 0, "2": 0 };
  for (const r of rows) counts[String(r.group)] = (counts[String(r.group)] ?? 0) + 1;
  return { delta, counts, rows };
}

describe("delta slider bounds", () => {
  it("clamps into the open (0, 0.5) interval", () => {
    expect(clampDelta(0.7)).toBeLessThan(0.5);
    expect(clampDelta(0)).toBeGreaterThan(0);
    expect(clampDelta(0.25)).toBe(0.25);
  });
});

describe("stale response handling", () => {
  it("applies responses in order", () => {
    const s = initialState();
    const seq1 = beginRequest(s, 0.25);
    expect(applyRoster(s, seq1, roster([row("a", 0)]))).toBe(true);
    expect(rosterSize(s)).toBe(1);
  });

  it("discards a stale response after a newer one applied", () => {
    const s = initialState();
    const seqSlow = beginRequest(s, 0.1);
    const seqFast = beginRequest(s, 0.45);
    const fast = roster([row("a", 1), row("b", 1)], 0.45);
    const slow = roster([row("a", 0), row("b", 0)], 0.1);
    expect(applyRoster(s, seqFast, fast)).toBe(true);
    expect(applyRoster(s, seqSlow, slow)).toBe(false);
    expect(s.roster).toEqual(fast);
    expect(s.delta).toBe(0.45); // final displayed state matches final delta
  });

  it("stale errors do not clobber newer data", () => {
    const s = initialState();
    const seqSlow = beginRequest(s, 0.1);
    const seqFast = beginRequest(s, 0.3);
    applyRoster(s, seqFast, roster([row("a", 0)]));
    expect(applyError(s, seqSlow, "boom")).toBe(false);
    expect(s.error).toBeNull();
  });
});

describe("counts come from the API, never recomputed", () => {
  it("exposes server counts verbatim and they sum to roster size", () => {
    const s = initialState();
    const resp = roster([row("a", 0), row("b", 1), row("c", 2), row("d", 1)]);
    applyRoster(s, beginRequest(s, 0.25), resp);
    const counts = groupCounts(s);
    expect(counts).toEqual(resp.counts);
    const total = Object.values(counts).reduce((a, b) => a + b, 0);
    expect(total).toBe(rosterSize(s));
  });

  it("counts badge rows for alert display", () => {
    const s = initialState();
    applyRoster(
      s,
      beginRequest(s, 0.25),
      roster([row("a", 2, true), row("b", 0), row("c", 2, true)]),
    );
    expect(badgeCount(s)).toBe(2);
  });
});

describe("sorting and filtering", () => {
  it("risk sort puts flagged rows first, then by user id", () => {
    const s = initialState();
    applyRoster(
      s,
      beginRequest(s, 0.25),
      roster([row("c", 0), row("b", 2, true), row("a", 1)]),
    );
    expect(visibleRows(s).map((r) => r.user_id)).toEqual(["b", "a", "c"]);
  });

  it("group filter narrows rows but preserves sort", () => {
    const s = initialState();
    applyRoster(
      s,
      beginRequest(s, 0.25),
      roster([row("c", 1), row("b", 1), row("a", 0)]),
    );
    s.filterGroup = 1;
    expect(visibleRows(s).map((r) => r.user_id)).toEqual(["b", "c"]);
  });
});

describe("optimistic interventions", () => {
  it("marks immediately and commits the server entry", () => {
    const s = initialState();
    optimisticMark(s, "a", true, "note");
    expect(isMarked(s, "a")).toBe(true);
    commitMark(s, {
      user_id: "a",
      marked: true,
      note: "note",
      author: "instructor",
      marked_at: "2026-01-01T00:00:00+00:00",
    });
    expect(s.marks["a"]?.marked_at).not.toBe("(pending)");
    expect(Object.keys(s.pending)).toHaveLength(0);
  });

  it("rolls back to the pre-edit value on failure", () => {
    const s = initialState();
    setMarks(s, {
      a: { user_id: "a", marked: true, note: "", author: "i", marked_at: "t" },
    });
    optimisticMark(s, "a", false);
    expect(isMarked(s, "a")).toBe(false);
    rollbackMark(s, "a");
    expect(isMarked(s, "a")).toBe(true);
  });

  it("rollback of a first-ever mark removes it entirely", () => {
    const s = initialState();
    optimisticMark(s, "z", true);
    rollbackMark(s, "z");
    expect("z" in s.marks).toBe(false);
  });

  it("empty note is allowed", () => {
    const s = initialState();
    optimisticMark(s, "a", true, "");
    expect(s.marks["a"]?.note).toBe("");
  });
});
