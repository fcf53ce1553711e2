#!/usr/bin/env node
/**
 * webdriver-lite: a minimal W3C WebDriver-compatible automation server
 * backed by jsdom instead of a real browser.
 *
 * It exists so the grader's live mode can run in environments without a
 * browser binary (CI, sandboxes). The Python client speaks the standard
 * wire protocol, so swapping in chromedriver needs only a URL change.
 *
 * Scope and conventions:
 *  - jsdom has no layout engine, so element rects are computed from SVG
 *    attributes (cx/cy/r, x/y/width/height) composed through ancestor
 *    `transform` chains. Fixtures must position marks via attributes,
 *    which is how D3 output looks anyway. HTML elements report zero rects.
 *  - Pointer actions synthesize MouseEvents (mouseover/out/enter/leave,
 *    mousemove, mousedown/up, click, dblclick). mousemove is dispatched on
 *    the element under the pointer and bubbles to window, which is where
 *    d3-drag listens.
 *  - Screenshots are solid white PNGs at the viewport size (no raster).
 *
 * Endpoints: /status, /session, /session/:id/{url,execute/sync,elements,
 * element, element/:eid/rect, actions, screenshot, log, window/rect}.
 */

"use strict";

const http = require("http");
const zlib = require("zlib");
const { URL } = require("url");
const { JSDOM, VirtualConsole } = require("jsdom");

const ELEMENT_KEY = "element-6066-11e4-a52e-4f735466cecf";
const CLICK_SLOP_PX = 5; // a press that travels farther is a drag, not a click
const DBLCLICK_MS = 500;

const sessions = new Map();
let nextSessionId = 1;

// --------------------------------------------------------------------------
// sessions
// --------------------------------------------------------------------------

function blankDom() {
  return new JSDOM("<!DOCTYPE html><html><head></head><body></body></html>", {
    pretendToBeVisual: true,
  });
}

function createSession() {
  const id = `wdl-${nextSessionId++}`;
  sessions.set(id, {
    id,
    dom: blankDom(),
    url: "about:blank",
    viewport: { width: 1280, height: 800 },
    errors: [],
    pointer: { x: 0, y: 0, buttons: 0 },
    hover: null,
    pressed: null,
    lastClick: null,
    elements: new Map(),
    nextElement: 1,
  });
  return id;
}

function destroySession(session) {
  try {
    session.dom.window.close();
  } catch (err) {
    /* window already gone */
  }
  sessions.delete(session.id);
}

function installPageHooks(session, window) {
  window.addEventListener("error", (event) => {
    session.errors.push({
      level: "SEVERE",
      message: String(event.message || event.error || "script error"),
      timestamp: Date.now(),
    });
  });
  // loopback-only fetch polyfill: d3.csv/d3.json use fetch, jsdom lacks it
  window.fetch = (input, init) => {
    let target;
    try {
      target = new URL(String(input), window.location.href);
    } catch (err) {
      return Promise.reject(new TypeError(`invalid URL: ${input}`));
    }
    if (target.hostname !== "127.0.0.1" && target.hostname !== "localhost") {
      return Promise.reject(
        new TypeError(`fetch blocked (loopback only): ${target}`));
    }
    return new Promise((resolve, reject) => {
      const req = http.get(target, (res) => {
        const chunks = [];
        res.on("data", (c) => chunks.push(c));
        res.on("end", () => {
          const body = Buffer.concat(chunks).toString("utf8");
          resolve({
            ok: res.statusCode >= 200 && res.statusCode < 300,
            status: res.statusCode,
            url: String(target),
            text: () => Promise.resolve(body),
            json: () => Promise.resolve(JSON.parse(body)),
            headers: { get: (h) => res.headers[String(h).toLowerCase()] },
          });
        });
      });
      req.on("error", reject);
    });
  };
}

async function navigate(session, url) {
  // reset page state first: parse-time script errors must land in the
  // fresh error list, not be wiped after the fact
  session.errors = [];
  session.hover = null;
  session.pressed = null;
  session.lastClick = null;
  session.elements = new Map();
  session.pointer = { x: 0, y: 0, buttons: 0 };
  const virtualConsole = new VirtualConsole();
  virtualConsole.on("jsdomError", (err) => {
    session.errors.push({
      level: "SEVERE",
      message: String((err && err.message) || err),
      timestamp: Date.now(),
    });
  });
  virtualConsole.on("error", () => {});
  const dom = await JSDOM.fromURL(url, {
    runScripts: "dangerously",
    resources: "usable",
    pretendToBeVisual: true,
    virtualConsole,
    beforeParse: (window) => installPageHooks(session, window),
  });
  try {
    session.dom.window.close();
  } catch (err) {
    /* previous window already closed */
  }
  session.dom = dom;
  session.url = url;
}

// --------------------------------------------------------------------------
// geometry from SVG attributes (jsdom renders nothing, so we compute)
// --------------------------------------------------------------------------

function numAttr(el, name, fallback) {
  const raw = el.getAttribute && el.getAttribute(name);
  if (raw === null || raw === undefined || raw === "") return fallback;
  const value = parseFloat(raw);
  return Number.isFinite(value) ? value : fallback;
}

// 2x3 affine [a,b,c,d,e,f]: x' = a*x + c*y + e ; y' = b*x + d*y + f
const IDENTITY = [1, 0, 0, 1, 0, 0];

function multiply(m, n) {
  // m applied after n (n touches the point first)
  return [
    m[0] * n[0] + m[2] * n[1],
    m[1] * n[0] + m[3] * n[1],
    m[0] * n[2] + m[2] * n[3],
    m[1] * n[2] + m[3] * n[3],
    m[0] * n[4] + m[2] * n[5] + m[4],
    m[1] * n[4] + m[3] * n[5] + m[5],
  ];
}

function applyMatrix(m, x, y) {
  return [m[0] * x + m[2] * y + m[4], m[1] * x + m[3] * y + m[5]];
}

function parseTransform(text) {
  let matrix = IDENTITY;
  if (!text) return matrix;
  const re = /([a-zA-Z]+)\s*\(([^)]*)\)/g;
  let hit;
  while ((hit = re.exec(text)) !== null) {
    const name = hit[1].toLowerCase();
    const args = hit[2].split(/[\s,]+/).filter(Boolean).map(parseFloat);
    let m = IDENTITY;
    if (name === "translate") {
      m = [1, 0, 0, 1, args[0] || 0, args.length > 1 ? args[1] : 0];
    } else if (name === "scale") {
      const sx = args.length ? args[0] : 1;
      const sy = args.length > 1 ? args[1] : sx;
      m = [sx, 0, 0, sy, 0, 0];
    } else if (name === "rotate") {
      const rad = ((args[0] || 0) * Math.PI) / 180;
      const cos = Math.cos(rad);
      const sin = Math.sin(rad);
      m = [cos, sin, -sin, cos, 0, 0];
      if (args.length === 3) {
        m = multiply(
          multiply([1, 0, 0, 1, args[1], args[2]], m),
          [1, 0, 0, 1, -args[1], -args[2]]);
      }
    } else if (name === "matrix" && args.length === 6) {
      m = args;
    }
    matrix = multiply(matrix, m);
  }
  return matrix;
}

function absoluteMatrix(el) {
  const chain = [];
  for (let node = el; node && node.getAttribute; node = node.parentNode) {
    chain.unshift(node);
  }
  let matrix = IDENTITY;
  for (const node of chain) {
    matrix = multiply(matrix, parseTransform(node.getAttribute("transform")));
  }
  return matrix;
}

function bboxOfPoints(points) {
  const xs = points.map((p) => p[0]);
  const ys = points.map((p) => p[1]);
  const x = Math.min(...xs);
  const y = Math.min(...ys);
  return { x, y, width: Math.max(...xs) - x, height: Math.max(...ys) - y };
}

function pathPoints(d) {
  // crude: absolute coordinate pairs after M/L (enough for hit boxes)
  const points = [];
  const re = /[ML]\s*([-+\d.eE]+)[\s,]+([-+\d.eE]+)/g;
  let hit;
  while ((hit = re.exec(d || "")) !== null) {
    points.push([parseFloat(hit[1]), parseFloat(hit[2])]);
  }
  return points;
}

function geometryOf(el) {
  const tag = (el.tagName || "").toLowerCase();
  const m = absoluteMatrix(el);
  if (tag === "circle" || tag === "ellipse") {
    const [cx, cy] = applyMatrix(m, numAttr(el, "cx", 0), numAttr(el, "cy", 0));
    const det = Math.abs(m[0] * m[3] - m[1] * m[2]);
    const baseR = tag === "circle"
      ? numAttr(el, "r", 0)
      : Math.max(numAttr(el, "rx", 0), numAttr(el, "ry", 0));
    const r = baseR * Math.sqrt(det);
    return { x: cx - r, y: cy - r, width: 2 * r, height: 2 * r };
  }
  if (tag === "rect" || tag === "image" || tag === "use" || tag === "text") {
    const x = numAttr(el, "x", 0);
    const y = numAttr(el, "y", 0);
    const w = numAttr(el, "width", 0);
    const h = numAttr(el, "height", 0);
    return bboxOfPoints([
      applyMatrix(m, x, y),
      applyMatrix(m, x + w, y),
      applyMatrix(m, x, y + h),
      applyMatrix(m, x + w, y + h),
    ]);
  }
  if (tag === "line") {
    return bboxOfPoints([
      applyMatrix(m, numAttr(el, "x1", 0), numAttr(el, "y1", 0)),
      applyMatrix(m, numAttr(el, "x2", 0), numAttr(el, "y2", 0)),
    ]);
  }
  if (tag === "path" || tag === "polygon" || tag === "polyline") {
    const raw = tag === "path"
      ? pathPoints(el.getAttribute("d"))
      : (el.getAttribute("points") || "")
          .split(/[\s,]+/).filter(Boolean).map(parseFloat)
          .reduce((acc, v, i, arr) =>
            i % 2 ? acc : acc.concat([[v, arr[i + 1]]]), []);
    if (raw.length) {
      return bboxOfPoints(raw.map((p) => applyMatrix(m, p[0], p[1])));
    }
    return { x: 0, y: 0, width: 0, height: 0 };
  }
  if (tag === "svg") {
    return {
      x: 0, y: 0,
      width: numAttr(el, "width", 0),
      height: numAttr(el, "height", 0),
    };
  }
  if (tag === "g") {
    const parts = [];
    for (const child of el.children) {
      const g = geometryOf(child);
      if (g.width > 0 || g.height > 0 || g.x !== 0 || g.y !== 0) {
        parts.push([g.x, g.y], [g.x + g.width, g.y + g.height]);
      }
    }
    return parts.length
      ? bboxOfPoints(parts)
      : { x: 0, y: 0, width: 0, height: 0 };
  }
  return { x: 0, y: 0, width: 0, height: 0 };
}

function hitTest(session, x, y) {
  const doc = session.dom.window.document;
  const shapes = doc.querySelectorAll(
    "circle, ellipse, rect, path, polygon, polyline, line, text, image");
  let found = null;
  for (const el of shapes) {
    if (el.closest && el.closest("defs")) continue;
    const tag = el.tagName.toLowerCase();
    if (tag === "circle" || tag === "ellipse") {
      const m = absoluteMatrix(el);
      const [cx, cy] = applyMatrix(
        m, numAttr(el, "cx", 0), numAttr(el, "cy", 0));
      const det = Math.abs(m[0] * m[3] - m[1] * m[2]);
      const baseR = tag === "circle"
        ? numAttr(el, "r", 0)
        : Math.max(numAttr(el, "rx", 0), numAttr(el, "ry", 0));
      const r = baseR * Math.sqrt(det);
      if (Math.hypot(x - cx, y - cy) <= r) found = el; // later = painted on top
      continue;
    }
    const g = geometryOf(el);
    if (g.width === 0 && g.height === 0) continue;
    if (x >= g.x && x <= g.x + g.width && y >= g.y && y <= g.y + g.height) {
      found = el;
    }
  }
  if (found) return found;
  const svg = doc.querySelector("svg");
  return svg || doc.body || doc.documentElement;
}

// --------------------------------------------------------------------------
// synthetic input
// --------------------------------------------------------------------------

function mouseOpts(session, extra) {
  return Object.assign({
    bubbles: true,
    cancelable: true,
    view: session.dom.window,
    clientX: session.pointer.x,
    clientY: session.pointer.y,
    button: 0,
    buttons: session.pointer.buttons,
  }, extra || {});
}

function fire(session, target, type, extra) {
  const window = session.dom.window;
  const event = new window.MouseEvent(type, mouseOpts(session, extra));
  target.dispatchEvent(event);
}

function movePointer(session, x, y) {
  session.pointer.x = x;
  session.pointer.y = y;
  const target = hitTest(session, x, y);
  if (target !== session.hover) {
    if (session.hover) {
      fire(session, session.hover, "mouseout");
      fire(session, session.hover, "mouseleave", { bubbles: false });
    }
    fire(session, target, "mouseover");
    fire(session, target, "mouseenter", { bubbles: false });
    session.hover = target;
  }
  fire(session, target, "mousemove");
}

function pointerDown(session) {
  session.pointer.buttons = 1;
  const target = session.hover
    || hitTest(session, session.pointer.x, session.pointer.y);
  session.hover = target;
  session.pressed = {
    target,
    x: session.pointer.x,
    y: session.pointer.y,
  };
  fire(session, target, "mousedown", { buttons: 1 });
}

function pointerUp(session) {
  session.pointer.buttons = 0;
  const target = session.hover
    || hitTest(session, session.pointer.x, session.pointer.y);
  fire(session, target, "mouseup", { buttons: 0 });
  const pressed = session.pressed;
  session.pressed = null;
  if (!pressed || pressed.target !== target) return;
  const travel = Math.hypot(
    session.pointer.x - pressed.x, session.pointer.y - pressed.y);
  if (travel > CLICK_SLOP_PX) return; // a drag, not a click
  fire(session, target, "click", { detail: 1 });
  const now = Date.now();
  const last = session.lastClick;
  if (last && last.target === target && now - last.time <= DBLCLICK_MS
      && Math.hypot(session.pointer.x - last.x, session.pointer.y - last.y) <= 10) {
    fire(session, target, "dblclick", { detail: 2 });
    session.lastClick = null;
  } else {
    session.lastClick = {
      target, time: now, x: session.pointer.x, y: session.pointer.y,
    };
  }
}

function sleep(ms) {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function performActions(session, sources) {
  for (const source of sources || []) {
    for (const action of source.actions || []) {
      if (action.type === "pause") {
        await sleep(action.duration || 0);
        continue;
      }
      if (source.type !== "pointer") continue;
      if (action.type === "pointerMove") {
        let baseX = 0;
        let baseY = 0;
        if (action.origin === "pointer") {
          baseX = session.pointer.x;
          baseY = session.pointer.y;
        } else if (action.origin && typeof action.origin === "object") {
          const el = session.elements.get(action.origin[ELEMENT_KEY]);
          if (!el) throw wireError("no such element", "stale element in origin");
          const g = geometryOf(el);
          baseX = g.x + g.width / 2;
          baseY = g.y + g.height / 2;
        }
        movePointer(session, baseX + (action.x || 0), baseY + (action.y || 0));
        if (action.duration) await sleep(Math.min(action.duration, 50));
      } else if (action.type === "pointerDown") {
        pointerDown(session);
      } else if (action.type === "pointerUp") {
        pointerUp(session);
      }
    }
  }
  // let microtasks queued by handlers (d3 timers) run before replying
  await sleep(0);
}

// --------------------------------------------------------------------------
// screenshots: solid white, viewport-sized
// --------------------------------------------------------------------------

const CRC_TABLE = (() => {
  const table = new Int32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c;
  }
  return table;
})();

function crc32(buf) {
  let c = ~0;
  for (let i = 0; i < buf.length; i++) {
    c = CRC_TABLE[(c ^ buf[i]) & 0xff] ^ (c >>> 8);
  }
  return ~c >>> 0;
}

function pngChunk(type, data) {
  const out = Buffer.alloc(12 + data.length);
  out.writeUInt32BE(data.length, 0);
  out.write(type, 4, "ascii");
  data.copy(out, 8);
  out.writeUInt32BE(crc32(out.subarray(4, 8 + data.length)), 8 + data.length);
  return out;
}

function solidPng(width, height) {
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8;  // bit depth
  ihdr[9] = 2;  // truecolor
  const stride = 1 + width * 3;
  const raw = Buffer.alloc(height * stride, 0xff);
  for (let row = 0; row < height; row++) raw[row * stride] = 0; // filter byte
  return Buffer.concat([
    Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
    pngChunk("IHDR", ihdr),
    pngChunk("IDAT", zlib.deflateSync(raw)),
    pngChunk("IEND", Buffer.alloc(0)),
  ]);
}

// --------------------------------------------------------------------------
// protocol surface
// --------------------------------------------------------------------------

function wireError(code, message, status) {
  const err = new Error(message);
  err.wire = { error: code, message, stacktrace: "" };
  err.status = status || 400;
  return err;
}

function registerElement(session, el) {
  for (const [id, existing] of session.elements) {
    if (existing === el) return id;
  }
  const id = `el-${session.nextElement++}`;
  session.elements.set(id, el);
  return id;
}

function runScript(session, script, args) {
  const window = session.dom.window;
  window.__wdl_args = args || [];
  try {
    return window.eval(
      `(function(){${script}\n}).apply(null, window.__wdl_args)`);
  } catch (err) {
    throw wireError("javascript error", String((err && err.message) || err), 500);
  } finally {
    try {
      delete window.__wdl_args;
    } catch (err) {
      /* window may have closed mid-script */
    }
  }
}

// Script return values cross the wire as JSON; DOM nodes become W3C
// element references, and references in incoming args map back to nodes.
function serializeForWire(session, value, depth = 0) {
  if (value === undefined || value === null || depth > 8) return null;
  const Node = session.dom.window.Node;
  if (typeof Node === "function" && value instanceof Node) {
    return { [ELEMENT_KEY]: registerElement(session, value) };
  }
  if (Array.isArray(value)) {
    return value.map((v) => serializeForWire(session, v, depth + 1));
  }
  if (typeof value === "object") {
    if (typeof value.length === "number" && typeof value.item === "function") {
      return Array.from(value).map((v) => serializeForWire(session, v, depth + 1));
    }
    const out = {};
    for (const key of Object.keys(value)) {
      out[key] = serializeForWire(session, value[key], depth + 1);
    }
    return out;
  }
  return value;
}

function deserializeArg(session, value) {
  if (value && typeof value === "object") {
    if (typeof value[ELEMENT_KEY] === "string") {
      const el = session.elements.get(value[ELEMENT_KEY]);
      if (!el) {
        throw wireError("no such element",
          `stale element ${value[ELEMENT_KEY]}`, 404);
      }
      return el;
    }
    if (Array.isArray(value)) {
      return value.map((v) => deserializeArg(session, v));
    }
    const out = {};
    for (const key of Object.keys(value)) {
      out[key] = deserializeArg(session, value[key]);
    }
    return out;
  }
  return value;
}

async function route(method, path, body) {
  if (method === "GET" && path === "/status") {
    return { ready: true, message: "webdriver-lite" };
  }
  if (method === "POST" && path === "/session") {
    return { sessionId: createSession(), capabilities: { browserName: "jsdom" } };
  }

  const parts = path.split("/").filter(Boolean);
  if (parts[0] !== "session" || parts.length < 2) {
    throw wireError("unknown command", `no route for ${method} ${path}`, 404);
  }
  const session = sessions.get(parts[1]);
  if (!session) {
    throw wireError("invalid session id", `no session ${parts[1]}`, 404);
  }
  const tail = parts.slice(2).join("/");

  if (method === "DELETE" && tail === "") {
    destroySession(session);
    return null;
  }
  if (method === "POST" && tail === "url") {
    try {
      await navigate(session, body.url);
    } catch (err) {
      throw wireError("unknown error",
        `navigation to ${body.url} failed: ${err.message}`, 500);
    }
    return null;
  }
  if (method === "GET" && tail === "url") {
    return session.url;
  }
  if (method === "POST" && tail === "window/rect") {
    if (body.width) session.viewport.width = Math.floor(body.width);
    if (body.height) session.viewport.height = Math.floor(body.height);
    return Object.assign({ x: 0, y: 0 }, session.viewport);
  }
  if (method === "POST" && tail === "execute/sync") {
    const args = (body.args || []).map((a) => deserializeArg(session, a));
    const value = runScript(session, body.script || "", args);
    return serializeForWire(session, value);
  }
  if (method === "POST" && (tail === "elements" || tail === "element")) {
    if (body.using !== "css selector") {
      throw wireError("invalid argument", `unsupported strategy ${body.using}`);
    }
    let nodes;
    try {
      nodes = session.dom.window.document.querySelectorAll(body.value);
    } catch (err) {
      throw wireError("invalid selector", String(err.message || err));
    }
    const refs = Array.from(nodes).map(
      (el) => ({ [ELEMENT_KEY]: registerElement(session, el) }));
    if (tail === "element") {
      if (!refs.length) {
        throw wireError("no such element",
          `no element matches ${body.value}`, 404);
      }
      return refs[0];
    }
    return refs;
  }
  if (method === "GET" && parts[2] === "element" && parts[4] === "rect") {
    const el = session.elements.get(parts[3]);
    if (!el) throw wireError("no such element", `stale element ${parts[3]}`, 404);
    return geometryOf(el);
  }
  if (method === "POST" && tail === "actions") {
    await performActions(session, body.actions);
    return null;
  }
  if (method === "DELETE" && tail === "actions") {
    session.pointer = { x: 0, y: 0, buttons: 0 };
    session.pressed = null;
    return null;
  }
  if (method === "GET" && tail === "screenshot") {
    return solidPng(session.viewport.width, session.viewport.height)
      .toString("base64");
  }
  if (method === "POST" && tail === "log") {
    if (body.type !== "browser") return [];
    return session.errors.slice();
  }
  throw wireError("unknown command", `no route for ${method} ${path}`, 404);
}

// --------------------------------------------------------------------------
// http front
// --------------------------------------------------------------------------

const server = http.createServer((req, res) => {
  const chunks = [];
  req.on("data", (c) => chunks.push(c));
  req.on("end", async () => {
    let body = {};
    if (chunks.length) {
      try {
        body = JSON.parse(Buffer.concat(chunks).toString("utf8"));
      } catch (err) {
        body = {};
      }
    }
    let status = 200;
    let payload;
    try {
      payload = { value: await route(req.method, req.url.split("?")[0], body) };
    } catch (err) {
      status = err.status || 500;
      payload = { value: err.wire
        || { error: "unknown error", message: String(err.message || err) } };
    }
    const text = JSON.stringify(payload);
    res.writeHead(status, {
      "content-type": "application/json; charset=utf-8",
      "content-length": Buffer.byteLength(text),
      "cache-control": "no-cache",
    });
    res.end(text);
  });
});

const portArg = process.argv.indexOf("--port");
const port = portArg >= 0 ? parseInt(process.argv[portArg + 1], 10) : 9515;
server.listen(port, "127.0.0.1", () => {
  // the spawning test harness parses this exact line to learn the port
  console.log(`WEBDRIVER_LITE_LISTENING port=${server.address().port}`);
});

process.on("SIGTERM", () => process.exit(0));
process.on("SIGINT", () => process.exit(0));
