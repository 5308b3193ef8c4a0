// Acceptance for the playground loop (criterion 10) plus the stale-response
// and failure-banner behaviors the live loop depends on.

import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';
import {
	DEBOUNCE_MS,
	Diagnostic,
	PlaygroundController,
	RenderRequest,
	RenderResponse,
} from '../src/controller.js';

interface Harness {
	controller: PlaygroundController;
	requests: RenderRequest[];
	previews: string[];
	diagnostics: Diagnostic[][];
	banners: (string | null)[];
	resolveNext: (response: RenderResponse) => void;
	rejectNext: (err: unknown) => void;
	respondImmediately: boolean;
	autoResponse: (req: RenderRequest) => RenderResponse;
}

function harness(respondImmediately = true): Harness {
	const pendingResolvers: Array<{
		resolve: (r: RenderResponse) => void;
		reject: (e: unknown) => void;
	}> = [];
	const h: Partial<Harness> = {
		requests: [],
		previews: [],
		diagnostics: [],
		banners: [],
		respondImmediately,
		autoResponse: () => ({ html: '<!DOCTYPE html>ok', diagnostics: [] }),
	};
	const transport = (req: RenderRequest): Promise<RenderResponse> => {
		h.requests!.push(req);
		if (h.respondImmediately) {
			return Promise.resolve(h.autoResponse!(req));
		}
		return new Promise<RenderResponse>((resolve, reject) => {
			pendingResolvers.push({ resolve, reject });
		});
	};
	h.resolveNext = (response) => pendingResolvers.shift()!.resolve(response);
	h.rejectNext = (err) => pendingResolvers.shift()!.reject(err);
	h.controller = new PlaygroundController(transport, {
		onPreview: (html) => h.previews!.push(html),
		onDiagnostics: (d) => h.diagnostics!.push(d),
		onBanner: (b) => h.banners!.push(b),
	});
	return h as Harness;
}

async function flushMicrotasks(): Promise<void> {
	await Promise.resolve();
	await Promise.resolve();
}

beforeEach(() => {
	vi.useFakeTimers();
});

afterEach(() => {
	vi.useRealTimers();
});

describe('debounced render loop', () => {
	it('a burst of sheet edits triggers exactly one render request', async () => {
		const h = harness();
		h.controller.setSheet('a@EInt(_) -> a { color: teal; }');
		vi.advanceTimersByTime(100);
		h.controller.setSheet('a@EInt(_) -> a { color: red; }');
		vi.advanceTimersByTime(100);
		h.controller.setSheet('a@EInt(_) -> a { color: green; }');
		expect(h.requests.length).toBe(0); // nothing until the window closes
		vi.advanceTimersByTime(DEBOUNCE_MS);
		await flushMicrotasks();
		expect(h.requests.length).toBe(1);
		expect(h.requests[0].sheet).toContain('green');
	});

	it('separate edits outside the window each render once', async () => {
		const h = harness();
		h.controller.setSheet('one');
		vi.advanceTimersByTime(DEBOUNCE_MS);
		await flushMicrotasks();
		h.controller.setSheet('two');
		vi.advanceTimersByTime(DEBOUNCE_MS);
		await flushMicrotasks();
		expect(h.requests.map((r) => r.sheet)).toEqual(['one', 'two']);
	});

	it('shows the service html verbatim in the preview', async () => {
		const h = harness();
		const html = '<!DOCTYPE html>\n<html><body>exact bytes &amp; all</body></html>\n';
		h.autoResponse = () => ({ html, diagnostics: [] });
		h.controller.setCode('main = 1\n');
		vi.advanceTimersByTime(DEBOUNCE_MS);
		await flushMicrotasks();
		expect(h.previews).toEqual([html]);
	});

	it('requests carry the current buffers and analysis', async () => {
		const h = harness();
		h.controller.setCode('main = 1\n');
		vi.advanceTimersByTime(DEBOUNCE_MS);
		await flushMicrotasks();
		h.controller.setAnalysis('heat');
		vi.advanceTimersByTime(DEBOUNCE_MS);
		await flushMicrotasks();
		expect(h.requests[1]).toEqual({
			code: 'main = 1\n',
			sheet: '',
			lang: 'tiny',
			analysis: 'heat',
			debug: false,
		});
	});
});

describe('diagnostics and error handling', () => {
	it('a selector syntax error surfaces as a diagnostic without clearing the preview', async () => {
		const h = harness();
		const good = '<!DOCTYPE html>good';
		h.autoResponse = () => ({ html: good, diagnostics: [] });
		h.controller.setSheet('a@EInt(_) -> a { color: teal; }');
		vi.advanceTimersByTime(DEBOUNCE_MS);
		await flushMicrotasks();
		expect(h.previews).toEqual([good]);

		const diag = { severity: 'error', message: "expected '->'", line: 1, col: 3 };
		h.autoResponse = () => ({ html: '', diagnostics: [diag] });
		h.controller.setSheet('a@EInt(_ -> broken');
		vi.advanceTimersByTime(DEBOUNCE_MS);
		await flushMicrotasks();
		// diagnostics delivered, preview untouched
		expect(h.diagnostics.at(-1)).toEqual([diag]);
		expect(h.previews).toEqual([good]);
	});

	it('network failure shows a banner and keeps the previous render', async () => {
		const h = harness();
		h.autoResponse = () => ({ html: 'first', diagnostics: [] });
		h.controller.setSheet('v1');
		vi.advanceTimersByTime(DEBOUNCE_MS);
		await flushMicrotasks();
		expect(h.previews).toEqual(['first']);

		h.respondImmediately = false;
		h.controller.setSheet('v2');
		vi.advanceTimersByTime(DEBOUNCE_MS);
		h.rejectNext(new Error('connection refused'));
		await flushMicrotasks();
		expect(h.banners.at(-1)).toContain('unreachable');
		expect(h.previews).toEqual(['first']);
	});
});

describe('in-flight discipline', () => {
	it('keeps at most one request in flight and re-renders after', async () => {
		const h = harness(false);
		h.controller.setSheet('v1');
		vi.advanceTimersByTime(DEBOUNCE_MS);
		expect(h.requests.length).toBe(1);
		// edit while the first request is still pending
		h.controller.setSheet('v2');
		vi.advanceTimersByTime(DEBOUNCE_MS);
		expect(h.requests.length).toBe(1); // not sent yet
		h.resolveNext({ html: 'one', diagnostics: [] });
		await flushMicrotasks();
		expect(h.requests.length).toBe(2); // dirty flag re-fired
		expect(h.requests[1].sheet).toBe('v2');
		h.resolveNext({ html: 'two', diagnostics: [] });
		await flushMicrotasks();
		expect(h.previews).toEqual(['one', 'two']);
	});

	it('loadExample fills buffers and renders immediately', async () => {
		const h = harness();
		h.controller.loadExample({ code: 'main = 1\n', sheet: 'x@EInt(_) -> x { color: teal; }', analysis: 'none' });
		await flushMicrotasks();
		expect(h.requests.length).toBe(1);
		expect(h.requests[0].code).toBe('main = 1\n');
	});
});

describe('debug layout pane', () => {
	it('debug renders include layout JSON, surfaced via onLayout', async () => {
		const layouts: unknown[] = [];
		const pendingLess = harness();
		// extend hooks: rebuild a controller with an onLayout hook
		const requests: RenderRequest[] = [];
		const controller = new PlaygroundController(
			(req) => {
				requests.push(req);
				return Promise.resolve({
					html: 'ok',
					diagnostics: [],
					layout: req.debug ? { fragments: [] } : undefined,
				});
			},
			{
				onPreview: () => {},
				onDiagnostics: () => {},
				onBanner: () => {},
				onLayout: (l) => layouts.push(l),
			},
		);
		controller.setDebug(true);
		vi.advanceTimersByTime(DEBOUNCE_MS);
		await flushMicrotasks();
		expect(requests[0].debug).toBe(true);
		expect(layouts).toEqual([{ fragments: [] }]);
		void pendingLess;
	});
});
