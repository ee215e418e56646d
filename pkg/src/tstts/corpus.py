"""Small models used by the agreement experiments and the test suite."""

from __future__ import annotations

from .benchmarks import TIMER, fischer_text
from .model import Stts, parse_model

MODELS: dict[str, str] = {}


def _add(text: str):
    sys = parse_model(text)
    MODELS[sys.name] = text


_add(TIMER)

_add("""
(stts (name "timer3")
  (vars (x1 bool) (x2 bool))
  (clocks d)
  (init (not x2))
  (invar (=> x2 (<= d 3)))
  (trans (= (next x2) (or (and (not x1) (next x1)) (and x2 (< d 3)))))
  (reset (d (and (not x1) (next x1))))
  (property (=> x2 (<= d 3))))
""")

# retriggerable timer: any rising edge restarts it, even while running
_add("""
(stts (name "retrigger")
  (vars (x1 bool) (x2 bool))
  (clocks d)
  (init (and (not x1) (not x2)))
  (invar (=> x2 (<= d 2)))
  (trans (and (= (next x2) (or (and (not x1) (next x1)) (and x2 (< d 2))))))
  (reset (d (and (not x1) (next x1))))
  (property (=> (and x1 x2) (<= d 2))))
""")

# debounced input: x1 may only toggle once d >= 1
_add("""
(stts (name "debounce")
  (vars (x1 bool) (x2 bool))
  (clocks d)
  (init (and (not x1) (not x2)))
  (invar (=> x2 (<= d 2)))
  (trans (and (=> (distinct x1 (next x1)) (>= d 1))
              (= (next x2) (or (and (not x1) (next x1)) (and x2 (< d 2))))))
  (reset (d (distinct x1 (next x1))))
  (property (not (and x1 (not x2) (< d 1)))))
""")

_add(fischer_text(2))
_add(fischer_text(2, buggy=True))

# light switch: one press dims, a second press within 2 brightens
_add("""
(stts (name "light")
  (vars (l int 0 2) (press bool))
  (clocks c)
  (init (= l 0))
  (trans (or
    (and (= l 0) (= (next l) 1))
    (and (= l 1) (< c 2) (= (next l) 2))
    (and (= l 1) (>= c 2) (= (next l) 0))
    (and (= l 2) (= (next l) 0))))
  (reset (c (and (= l 0) (= (next l) 1))))
  (property (distinct l 3)))
""")

# ticking counter: n advances every time unit, wraps at 3
_add("""
(stts (name "ticker")
  (vars (n int 0 3))
  (clocks c)
  (init (= n 0))
  (invar (<= c 1))
  (trans (and (= c 1) (or (and (< n 3) (= (next n) (+ n 1)))
                          (and (= n 3) (= (next n) 0)))))
  (reset (c true))
  (property (<= n 3)))
""")

# watchdog: kicks reset k; alarm when k reaches 3
_add("""
(stts (name "watchdog")
  (vars (alarm bool))
  (clocks k)
  (init (not alarm))
  (invar (<= k 3))
  (trans (or (and (not alarm) (next alarm) (= k 3))
             (and (= (next alarm) alarm) (< k 3))))
  (reset (k (not (next alarm))))
  (property (not alarm)))
""")

# untimed modular counter
_add("""
(stts (name "counter")
  (vars (n int 0 4) (up bool))
  (clocks)
  (init (and (= n 0) up))
  (trans (or (and up (< n 3) (= (next n) (+ n 1)) (next up))
             (and up (= n 3) (= (next n) n) (not (next up)))
             (and (not up) (> n 0) (= (next n) (- n 1)) (not (next up)))
             (and (not up) (= n 0) (= (next n) n) (next up))))
  (property (<= n 3)))
""")

# two free clocks with nondeterministic resets; the region-example geometry
_add("""
(stts (name "twoclocks")
  (vars (f bool))
  (clocks c d)
  (invar (and (<= c 4) (<= d 3)))
  (trans (and (=> (next f) (and (> c 3) (< d 2))) (=> f (next f))))
  (reset (c (and (not f) (>= c 3))) (d (>= d 2)))
  (property (not f)))
""")

# pulse generator: high for exactly one unit, low for at least two
_add("""
(stts (name "pulse")
  (vars (hi bool))
  (clocks c)
  (init (not hi))
  (invar (=> hi (<= c 1)))
  (trans (or (and hi (= c 1) (not (next hi)))
             (and (not hi) (>= c 2) (next hi))))
  (reset (c true))
  (property (=> hi (<= c 1))))
""")

# alternating resets of two clocks
_add("""
(stts (name "alternate")
  (vars (turn bool))
  (clocks a b)
  (init turn)
  (invar (and (=> turn (<= a 2)) (=> (not turn) (<= b 2))))
  (trans (and (= (next turn) (not turn))
              (=> turn (>= a 1)) (=> (not turn) (>= b 1))))
  (reset (a (and (not turn) (next turn))) (b (and turn (not (next turn)))))
  (property (or (<= a 4) (<= b 4))))
""")

# sender with retransmission timer and lossy channel
_add("""
(stts (name "sender")
  (vars (st int 0 2) (lost bool))
  (clocks t)
  (init (= st 0))
  (invar (=> (= st 1) (<= t 3)))
  (trans (or
    (and (= st 0) (= (next st) 1))
    (and (= st 1) (not lost) (>= t 1) (= (next st) 2))
    (and (= st 1) (= t 3) (= (next st) 1))
    (and (= st 2) (= (next st) 0))))
  (reset (t (and (= (next st) 1) (distinct st 2))))
  (property (=> (= st 1) (<= t 3))))
""")

# door: stays open at most 2, closed at least 1 before reopening
_add("""
(stts (name "door")
  (vars (open bool) (req bool))
  (clocks c)
  (init (not open))
  (invar (=> open (<= c 2)))
  (trans (or (and open (not (next open)))
             (and (not open) req (>= c 1) (next open))))
  (reset (c (distinct open (next open))))
  (property (=> open (<= c 2))))
""")

# timer with two inputs, either rising edge starts it
_add("""
(stts (name "timer2in")
  (vars (a bool) (b bool) (on bool))
  (clocks d)
  (init (not on))
  (invar (=> on (<= d 2)))
  (trans (= (next on) (or (and (not a) (next a)) (and (not b) (next b)) (and on (< d 2)))))
  (reset (d (or (and (not a) (next a)) (and (not b) (next b)))))
  (property (=> on (<= d 2))))
""")

# blinker: toggles exactly when c reaches 1
_add("""
(stts (name "blink")
  (vars (x bool))
  (clocks c)
  (init (not x))
  (invar (<= c 1))
  (trans (and (= c 1) (distinct x (next x))))
  (reset (c true))
  (property (<= c 1)))
""")

# crossing: train approach, gate must be down within 1, train arrives after 2
_add("""
(stts (name "crossing")
  (vars (train int 0 2) (down bool))
  (clocks x y)
  (init (and (= train 0) (not down)))
  (invar (and (=> (= train 1) (<= x 3)) (=> (and (= train 1) (not down)) (<= y 1))))
  (trans (or
    (and (= train 0) (= (next train) 1) (= (next down) down))
    (and (= train 1) (>= x 2) (= (next train) 2) (= (next down) down))
    (and (= train 2) (= (next train) 0) (not (next down)))
    (and (= train 1) (not down) (next down) (= (next train) train))))
  (reset (x (and (= train 0) (= (next train) 1))) (y (and (= train 0) (= (next train) 1))))
  (property (=> (= train 2) down)))
""")

# two-stage timeout chain
_add("""
(stts (name "stages")
  (vars (s int 0 2))
  (clocks c d)
  (init (= s 0))
  (invar (and (=> (= s 0) (<= c 1)) (=> (= s 1) (<= d 2))))
  (trans (or (and (= s 0) (= c 1) (= (next s) 1))
             (and (= s 1) (>= d 2) (= (next s) 2))
             (and (= s 2) (= (next s) 0))))
  (reset (c (= (next s) 0)) (d (= (next s) 1)))
  (property (=> (= s 2) (>= c 2))))
""")

# toggle with a minimum dwell time
_add("""
(stts (name "dwell")
  (vars (x bool) (y bool))
  (clocks c)
  (init (and (not x) (not y)))
  (trans (or (and (>= c 2) (distinct x (next x)) (= y (next y)))
             (and (< c 1) (= x (next x)) (distinct y (next y)))))
  (reset (c (distinct x (next x))))
  (property (not (and x y (< c 1)))))
""")

# bounded latency monitor over two clocks
_add("""
(stts (name "latency")
  (vars (busy bool))
  (clocks r w)
  (init (not busy))
  (invar (=> busy (<= w 2)))
  (trans (or (and (not busy) (next busy))
             (and busy (>= w 1) (not (next busy)))))
  (reset (w (and (not busy) (next busy))) (r (and busy (not (next busy)))))
  (property (=> busy (<= w 2))))
""")


# Tiny systems whose properties are not k-inductive without region
# disequalities: each has an unreachable loop of good states leading to a bad
# one.
TINY = ("latch", "frozen", "drift", "updown", "arm", "hold")

_add("""
(stts (name "latch")
  (vars (x bool) (y bool))
  (clocks)
  (init (and (not x) (not y)))
  (trans (and (= (next x) x) (=> (next y) x)))
  (property (not (and x y))))
""")

_add("""
(stts (name "frozen")
  (vars (x bool))
  (clocks c)
  (init (not x))
  (trans (= (next x) x))
  (property (or (not x) (< c 2))))
""")

_add("""
(stts (name "drift")
  (vars (x bool))
  (clocks c d)
  (init (not x))
  (trans (= (next x) x))
  (reset (d (>= c 1)))
  (property (or (not x) (< d 2))))
""")

_add("""
(stts (name "updown")
  (vars (n int 0 3))
  (clocks)
  (init (= n 0))
  (trans (or (and (> n 0) (= (next n) (- n 1)))
             (and (= n 0) (= (next n) 0))
             (and (>= n 1) (< n 3) (= (next n) (+ n 1)))))
  (property (distinct n 3)))
""")

_add("""
(stts (name "arm")
  (vars (a bool) (b bool))
  (clocks c)
  (init (and (not a) (not b)))
  (trans (and (= (next a) a) (=> (next b) a)))
  (reset (c (next b)))
  (property (not (and b (> c 1)))))
""")

_add("""
(stts (name "hold")
  (vars (x bool) (y bool))
  (clocks c)
  (init (and (not x) (not y)))
  (invar (=> y (<= c 2)))
  (trans (and (= (next x) x) (=> (next y) (or y x))))
  (reset (c (and (not y) (next y))))
  (property (not (and y (> c 1)))))
""")


def corpus_models(names=None) -> dict[str, Stts]:
    names = MODELS if names is None else names
    return {name: parse_model(MODELS[name]) for name in names}
