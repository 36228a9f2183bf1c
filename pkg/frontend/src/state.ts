/** Roster view model: trust-level what-ifs with stale-response protection,
 * sort/filter state, and optimistic intervention edits. */

import type { InterventionMark, RosterResponse, TriageRow } from "./api.ts";

export type SortKey = "risk" | "user" | "p" | "c";

export interface ViewState {
  delta: number;
  requestSeq: number;
  appliedSeq: number;
  roster: RosterResponse | null;
  marks: Record<string, InterventionMark>;
  pending: Record<string, InterventionMark | null>;
  sortKey: SortKey;
  filterGroup: number | null;
  selected: string | null;
  error: string | null;
}

export const DELTA_MIN = 0.01;
export const DELTA_MAX = 0.49;

export function initialState(delta = 0.25): ViewState {
  return {
    delta,
    requestSeq: 0,
    appliedSeq: 0,
    roster: null,
    marks: {},
    pending: {},
    sortKey: "risk",
    filterGroup: null,
    selected: null,
    error: null,
  };
}

export function clampDelta(delta: number): number {
  return Math.min(DELTA_MAX, Math.max(DELTA_MIN, delta));
}

/** Issue a new roster request; the returned seq tags the in-flight fetch. */
export function beginRequest(state: ViewState, delta: number): number {
  state.delta = clampDelta(delta);
  state.requestSeq += 1;
  return state.requestSeq;
}

/** Apply a roster response unless a newer one has already been applied. */
export function applyRoster(
  state: ViewState,
  seq: number,
  roster: RosterResponse,
): boolean {
  if (seq <= state.appliedSeq) {
    return false; // stale response from a superseded request
  }
  state.appliedSeq = seq;
  state.roster = roster;
  state.error = null;
  return true;
}

export function applyError(state: ViewState, seq: number, message: string): boolean {
  if (seq <= state.appliedSeq) {
    return false;
  }
  state.error = message;
  return true;
}

export function groupCounts(state: ViewState): Record<string, number> {
  return state.roster ? state.roster.counts : { "0": 0, "1": 0, "2": 0 };
}

export function rosterSize(state: ViewState): number {
  return state.roster ? state.roster.rows.length : 0;
}

export function badgeCount(state: ViewState): number {
  if (!state.roster) return 0;
  return state.roster.rows.filter((r) => r.uu_risk).length;
}

export function visibleRows(state: ViewState): TriageRow[] {
  if (!state.roster) return [];
  let rows = state.roster.rows.slice();
  if (state.filterGroup !== null) {
    rows = rows.filter((r) => r.group === state.filterGroup);
  }
  const cmp: Record<SortKey, (a: TriageRow, b: TriageRow) => number> = {
    risk: (a, b) =>
      Number(b.uu_risk) - Number(a.uu_risk) || a.user_id.localeCompare(b.user_id),
    user: (a, b) => a.user_id.localeCompare(b.user_id),
    p: (a, b) => b.p - a.p || a.user_id.localeCompare(b.user_id),
    c: (a, b) => b.c - a.c || a.user_id.localeCompare(b.user_id),
  };
  rows.sort(cmp[state.sortKey]);
  return rows;
}

export function setMarks(
  state: ViewState,
  marks: Record<string, InterventionMark>,
): void {
  state.marks = { ...marks };
}

export function isMarked(state: ViewState, userId: string): boolean {
  return Boolean(state.marks[userId]?.marked);
}

/** Optimistically apply a mark; keep the previous value for rollback. */
export function optimisticMark(
  state: ViewState,
  userId: string,
  marked: boolean,
  note = "",
): void {
  if (!(userId in state.pending)) {
    state.pending[userId] = state.marks[userId] ?? null;
  }
  state.marks[userId] = {
    user_id: userId,
    marked,
    note,
    author: "instructor",
    marked_at: "(pending)",
  };
}

/** Server confirmed: keep the stored entry, clear the snapshot. */
export function commitMark(state: ViewState, mark: InterventionMark): void {
  state.marks[mark.user_id] = mark;
  delete state.pending[mark.user_id];
}

/** Server rejected: restore the snapshot taken before the optimistic edit. */
export function rollbackMark(state: ViewState, userId: string): void {
  if (userId in state.pending) {
    const previous = state.pending[userId];
    if (previous === null) {
      delete state.marks[userId];
    } else if (previous !== undefined) {
      state.marks[userId] = previous;
    }
    delete state.pending[userId];
  }
}
