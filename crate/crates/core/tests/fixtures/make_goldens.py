"""Writes the WebDriver request goldens: one file per interaction, holding
the raw HTTP/1.1 requests issued to perform it, `{host}` standing for the
driver authority."""

import json
import os

HERE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "webdriver")
SESSION = "/session/s1"
ELEMENT_KEY = "element-6066-11e4-a52e-4f735411628b"

CHOOSE_SCRIPT = (
    "const [el, wanted, on] = arguments; "
    "const norm = s => s.replace(/\\s+/g, ' ').trim().toLowerCase(); "
    "for (const o of el.options || []) { "
    "if (norm(o.label) === norm(wanted) || norm(o.value) === norm(wanted)) { "
    "o.selected = on; "
    "el.dispatchEvent(new Event('input', {bubbles: true})); "
    "el.dispatchEvent(new Event('change', {bubbles: true})); "
    "return true; } } "
    "return false;"
)

SUBMIT_SCRIPT = (
    "const el = arguments[0]; "
    "const form = el.tagName === 'FORM' ? el : (el.form || el.closest('form')); "
    "if (!form) { el.click(); return false; } "
    "if (form.requestSubmit) { form.requestSubmit(); } else { form.submit(); } "
    "return true;"
)

KEYS = {"enter": "\ue007", "shift": "\ue008", "tab": "\ue004"}


def request(method, path, body=None):
    head = "%s %s HTTP/1.1\r\nHost: {host}\r\nAccept: application/json\r\n" % (method, path)
    data = b""
    if body is not None:
        data = json.dumps(body, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
        head += "Content-Type: application/json; charset=utf-8\r\n"
        head += "Content-Length: %d\r\n" % len(data)
    head += "Connection: close\r\n\r\n"
    return head.encode("utf-8") + data


def cmd(method, suffix, body=None):
    return request(method, SESSION + suffix, body)


def ref(el):
    return {ELEMENT_KEY: el}


def find(id):
    return cmd("POST", "/element", {"using": "css selector", "value": '[data-vq-id="%s"]' % id})


def actions(seq):
    return cmd("POST", "/actions", {"actions": seq})


def pointer(steps):
    return actions([{"type": "pointer", "id": "mouse", "parameters": {"pointerType": "mouse"}, "actions": steps}])


def keyboard(steps):
    return actions([{"type": "key", "id": "keyboard", "actions": steps}])


def move(el):
    return {"type": "pointerMove", "duration": 0, "origin": ref(el), "x": 0, "y": 0}


def button(kind, b):
    return {"type": kind, "button": b}


def wd(id):
    return "wd-" + id


GOLDENS = {
    "click": find("btn") + cmd("POST", "/element/wd-btn/click", {}),
    "doubleClick": find("btn") + pointer([move(wd("btn")), button("pointerDown", 0), button("pointerUp", 0),
                                          button("pointerDown", 0), button("pointerUp", 0)]),
    "rightClick": find("btn") + pointer([move(wd("btn")), button("pointerDown", 2), button("pointerUp", 2)]),
    "hover": find("btn") + pointer([move(wd("btn"))]),
    "drag": find("btn") + find("field") + pointer([move(wd("btn")), button("pointerDown", 0),
                                                   move(wd("field")), button("pointerUp", 0)]),
    "dragBy": find("btn") + pointer([move(wd("btn")), button("pointerDown", 0),
                                     {"type": "pointerMove", "duration": 0, "origin": "pointer", "x": 12, "y": -8},
                                     button("pointerUp", 0)]),
    "type": find("field") + cmd("POST", "/element/wd-field/clear", {})
    + cmd("POST", "/element/wd-field/value", {"text": "Grüße ✓ \"q\"\n"}),
    "append": find("field") + cmd("POST", "/element/wd-field/value", {"text": "more"}),
    "keyPress": find("field") + cmd("POST", "/element/wd-field/value", {"text": KEYS["enter"]}),
    "keyPressPage": keyboard([{"type": "keyDown", "value": KEYS["tab"]}, {"type": "keyUp", "value": KEYS["tab"]}]),
    "keyHold": keyboard([{"type": "keyDown", "value": KEYS["shift"]}]),
    "keyRelease": keyboard([{"type": "keyUp", "value": KEYS["shift"]}]),
    "choose": find("sel") + cmd("POST", "/execute/sync", {"script": CHOOSE_SCRIPT, "args": [ref(wd("sel")), "Blue", True]}),
    "unchoose": find("sel") + cmd("POST", "/execute/sync", {"script": CHOOSE_SCRIPT, "args": [ref(wd("sel")), "Blue", False]}),
    "checkToggle": find("box") + cmd("POST", "/element/wd-box/click", {}),
    "chooseDate": find("date") + cmd("POST", "/element/wd-date/clear", {})
    + cmd("POST", "/element/wd-date/value", {"text": "2012-11-03"}),
    "submit": find("field") + cmd("POST", "/execute/sync", {"script": SUBMIT_SCRIPT, "args": [ref(wd("field"))]}),
    "open": cmd("POST", "/url", {"url": "http://example.test/ä?q=1"}),
    "back": cmd("POST", "/back", {}),
    "forward": cmd("POST", "/forward", {}),
}


def main():
    os.makedirs(HERE, exist_ok=True)
    for name, data in GOLDENS.items():
        with open(os.path.join(HERE, name + ".http"), "wb") as f:
            f.write(data)


if __name__ == "__main__":
    main()
