// Playground state machine: debounced renders against the local service,
// with stale responses dropped and the last good preview kept on errors.
//
// The controller is framework-free; timers and transport are injected so
// the render loop can be tested without a browser.

export interface Diagnostic {
	severity: string;
	message: string;
	line: number;
	col: number;
}

export interface RenderRequest {
	code: string;
	sheet: string;
	lang: string;
	analysis: string;
	debug: boolean;
}

export interface RenderResponse {
	html: string;
	diagnostics: Diagnostic[];
	layout?: unknown;
}

export type Transport = (req: RenderRequest) => Promise<RenderResponse>;

export interface ControllerHooks {
	onPreview(html: string): void;
	onDiagnostics(diags: Diagnostic[]): void;
	onBanner(message: string | null): void;
	onLayout?(layout: unknown | null): void;
}

export interface TimerApi {
	set(fn: () => void, ms: number): unknown;
	clear(handle: unknown): void;
}

export const DEBOUNCE_MS = 300;

export class PlaygroundController {
	code = '';
	sheet = '';
	analysis = 'none';
	debug = false;

	private timer: unknown = null;
	private seq = 0; // sequence number of the newest request sent
	private applied = 0; // newest sequence whose response was applied
	private inFlight = false;
	private dirty = false;

	constructor(
		private transport: Transport,
		private hooks: ControllerHooks,
		private timers: TimerApi = {
			set: (fn, ms) => setTimeout(fn, ms),
			clear: (h) => clearTimeout(h as ReturnType<typeof setTimeout>),
		},
	) {}

	setCode(code: string): void {
		this.code = code;
		this.schedule();
	}

	setSheet(sheet: string): void {
		this.sheet = sheet;
		this.schedule();
	}

	setAnalysis(analysis: string): void {
		this.analysis = analysis;
		this.schedule();
	}

	setDebug(debug: boolean): void {
		this.debug = debug;
		this.schedule();
	}

	/** Fill both buffers from a bundled example and render immediately. */
	loadExample(example: { code: string; sheet: string; analysis?: string }): void {
		this.code = example.code;
		this.sheet = example.sheet;
		this.analysis = example.analysis ?? 'none';
		this.renderNow();
	}

	private schedule(): void {
		if (this.timer !== null) {
			this.timers.clear(this.timer);
		}
		this.timer = this.timers.set(() => {
			this.timer = null;
			this.renderNow();
		}, DEBOUNCE_MS);
	}

	renderNow(): void {
		if (this.inFlight) {
			// keep a single request in flight; remember to re-render after
			this.dirty = true;
			return;
		}
		const mySeq = ++this.seq;
		const request: RenderRequest = {
			code: this.code,
			sheet: this.sheet,
			lang: 'tiny',
			analysis: this.analysis,
			debug: this.debug,
		};
		this.inFlight = true;
		this.transport(request).then(
			(response) => {
				this.inFlight = false;
				if (mySeq > this.applied) {
					this.applied = mySeq;
					this.apply(response);
				}
				this.flushDirty();
			},
			(err) => {
				this.inFlight = false;
				this.hooks.onBanner(`render service unreachable: ${String(err)}`);
				this.flushDirty();
			},
		);
	}

	private flushDirty(): void {
		if (this.dirty) {
			this.dirty = false;
			this.renderNow();
		}
	}

	private apply(response: RenderResponse): void {
		this.hooks.onBanner(null);
		this.hooks.onDiagnostics(response.diagnostics);
		this.hooks.onLayout?.(response.layout ?? null);
		const hasErrors = response.diagnostics.some((d) => d.severity === 'error');
		// a failed render keeps the previous preview visible
		if (!hasErrors || response.html !== '') {
			this.hooks.onPreview(response.html);
		}
	}
}
