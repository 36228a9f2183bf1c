/** Browser bootstrap: wires the slider, roster table, and intervention
 * buttons to the view model. All group partitioning comes from the API. */

import { ApiClient, ApiError } from "./api.ts";
import {
  ViewState,
  applyError,
  applyRoster,
  beginRequest,
  commitMark,
  initialState,
  optimisticMark,
  rollbackMark,
  setMarks,
} from "./state.ts";
import { renderApp } from "./render.ts";

const DEBOUNCE_MS = 150;

export class DashboardApp {
  state: ViewState;
  private debounceTimer: number | undefined;

  constructor(
    private api: ApiClient,
    private root: HTMLElement,
    private slider: HTMLInputElement,
    private sliderLabel: HTMLElement,
  ) {
    this.state = initialState(Number(slider.value));
  }

  render(): void {
    this.root.innerHTML = renderApp(this.state);
    this.sliderLabel.textContent = this.state.delta.toFixed(2);
  }

  async refreshRoster(delta: number): Promise<void> {
    const seq = beginRequest(this.state, delta);
    try {
      const roster = await this.api.fetchRoster(this.state.delta);
      if (applyRoster(this.state, seq, roster)) {
        this.render();
      }
    } catch (err) {
      const message = err instanceof ApiError ? err.message : "API unreachable";
      if (applyError(this.state, seq, message)) {
        this.render();
      }
    }
  }

  async refreshMarks(): Promise<void> {
    try {
      setMarks(this.state, await this.api.fetchInterventions());
      this.render();
    } catch {
      // non-blocking: marks stay as-is, roster remains usable
    }
  }

  onSliderInput(value: number): void {
    window.clearTimeout(this.debounceTimer);
    this.debounceTimer = window.setTimeout(() => {
      void this.refreshRoster(value);
    }, DEBOUNCE_MS);
  }

  async toggleMark(userId: string): Promise<void> {
    const next = !this.state.marks[userId]?.marked;
    optimisticMark(this.state, userId, next);
    this.render();
    try {
      const stored = await this.api.postIntervention(userId, next);
      commitMark(this.state, stored);
    } catch (err) {
      rollbackMark(this.state, userId);
      this.state.error =
        err instanceof ApiError ? `mark failed: ${err.message}` : "mark failed: offline";
    }
    this.render();
  }

  toggleDetail(userId: string): void {
    this.state.selected = this.state.selected === userId ? null : userId;
    this.render();
  }

  bind(): void {
    this.slider.addEventListener("input", () => {
      this.sliderLabel.textContent = Number(this.slider.value).toFixed(2);
      this.onSliderInput(Number(this.slider.value));
    });
    this.root.addEventListener("click", (ev) => {
      const target = ev.target as HTMLElement;
      const markBtn = target.closest<HTMLElement>(".mark-btn");
      if (markBtn?.dataset.user) {
        void this.toggleMark(markBtn.dataset.user);
        return;
      }
      if (target.closest(".retry-btn")) {
        void this.refreshRoster(this.state.delta);
        return;
      }
      const row = target.closest<HTMLElement>("tr.row");
      if (row?.dataset.user) {
        this.toggleDetail(row.dataset.user);
      }
    });
  }

  async start(): Promise<void> {
    this.bind();
    this.render();
    await Promise.all([this.refreshRoster(this.state.delta), this.refreshMarks()]);
  }
}

function boot(): void {
  const root = document.getElementById("app");
  const slider = document.getElementById("delta-slider") as HTMLInputElement | null;
  const label = document.getElementById("delta-value");
  if (!root || !slider || !label) {
    throw new Error("dashboard shell markup missing");
  }
  const app = new DashboardApp(new ApiClient(""), root, slider, label);
  void app.start();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}
