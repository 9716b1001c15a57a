# Copyright (C) 2026 The dexlens Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates every binary fixture under tests/fixtures.

Output is byte-for-byte reproducible. Run from any directory:

    python3 tests/fixtures/gen/make_fixtures.py
"""

import os
import struct
import sys
import zipfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
from dexgen import *  # noqa: E402,F401,F403

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.dirname(HERE)

OBJ = "Ljava/lang/Object;"
STR = "Ljava/lang/String;"
CTX = "Landroid/content/Context;"
SB = "Ljava/lang/StringBuilder;"
FILE = "Ljava/io/File;"
DCL = "Ldalvik/system/DexClassLoader;"
CL = "Ljava/lang/ClassLoader;"
CLS = "Ljava/lang/Class;"
METH = "Ljava/lang/reflect/Method;"
CTOR = "Ljava/lang/reflect/Constructor;"
AO = "Ljava/lang/reflect/AccessibleObject;"
THREAD = "Ljava/lang/Thread;"
RUNNABLE = "Ljava/lang/Runnable;"
EXC = "Ljava/lang/Exception;"
APPINFO = "Landroid/content/pm/ApplicationInfo;"
RUNTIME = "Ljava/lang/Runtime;"
PROCESS = "Ljava/lang/Process;"
LOG = "Landroid/util/Log;"
LIST = "Ljava/util/ArrayList;"
MSG = "Landroid/os/Message;"
HANDLER = "Landroid/os/Handler;"
ACTIVITY = "Landroid/app/Activity;"
BUNDLE = "Landroid/os/Bundle;"
PRINTSTREAM = "Ljava/io/PrintStream;"
SYSTEM = "Ljava/lang/System;"

OBJ_INIT = M(OBJ, "<init>")
SB_INIT = M(SB, "<init>", "V", [STR])
SB_INIT0 = M(SB, "<init>")
SB_APPEND = M(SB, "append", SB, [STR])
SB_APPEND_I = M(SB, "append", SB, ["I"])
SB_TOSTRING = M(SB, "toString", STR)
STR_VALUEOF = M(STR, "valueOf", STR, [OBJ])
LOG_D = M(LOG, "d", "I", [STR, STR])
LOG_I = M(LOG, "i", "I", [STR, STR])
LOG_W = M(LOG, "w", "I", [STR, STR])
THREAD_INIT = M(THREAD, "<init>", "V", [RUNNABLE])
THREAD_START = M(THREAD, "start")


def trivial_init(cls, superclass=OBJ):
    cls.method("<init>", access=ACC_PUBLIC, registers=1, code=[
        ("invoke-direct", [0], M(superclass, "<init>")),
        ("return-void",),
    ])


def add_rooting_class(dex, pkg, name, runner_prefix="", with_exec=True):
    """Class mirroring the decompiled RTUtils listing: initRoot spawns a thread
    that ends up in the synthetic b() which loads cn.engine.RootPermApi
    through a DexClassLoader and calls it reflectively."""
    desc = "L%s/%s;" % (pkg.replace(".", "/"), name)
    runner_c = "L%s/%sc;" % (pkg.replace(".", "/"), runner_prefix)
    runner_d = "L%s/%sd;" % (pkg.replace(".", "/"), runner_prefix)
    cls = dex.add_class(desc, ACC_PUBLIC, source_file="SourceFile")
    loader_field = cls.field("a", DCL, ACC_PRIVATE | ACC_STATIC)
    root_file = cls.field("RootFileName", STR, ACC_PUBLIC | ACC_STATIC)

    cls.method("<clinit>", access=ACC_STATIC, registers=1, code=[
        ("const-string", 0, "libroot.jar"),
        ("sput-object", 0, root_file),
        ("return-void",),
    ])
    trivial_init(cls)
    get_id = cls.method("a", STR, [CTX], ACC_PUBLIC | ACC_STATIC, registers=2, code=[
        ("invoke-virtual", [1], M(CTX, "getPackageName", STR)),
        ("move-result-object", 0),
        ("return-object", 0),
    ])
    b = M(desc, "b", "V", [CTX, STR, STR])
    cls.method("initRoot", "V", [CTX], ACC_PUBLIC | ACC_STATIC, registers=4, code=[
        ("invoke-static", [3], get_id),
        ("move-result-object", 0),
        ("new-instance", 1, THREAD),
        ("new-instance", 2, runner_c),
        ("invoke-direct", [2, 3, 0, 0], M(runner_c, "<init>", "V", [CTX, STR, STR])),
        ("invoke-direct", [1, 2], THREAD_INIT),
        ("invoke-virtual", [1], THREAD_START),
        ("return-void",),
    ])
    exec_code = []
    if with_exec:
        exec_code = [
            ("invoke-static", [], M(RUNTIME, "getRuntime", RUNTIME)),
            ("move-result-object", 0),
            ("const-string", 1, "su"),
            ("invoke-virtual", [0, 1], M(RUNTIME, "exec", PROCESS, [STR])),
            ("move-result-object", 0),
        ]
    cls.method("executeRoot", "V", [CTX, STR, "Z"], ACC_PUBLIC | ACC_STATIC, registers=6, code=exec_code + [
        ("new-instance", 1, THREAD),
        ("new-instance", 2, runner_d),
        ("invoke-direct", [2, 3, 4, 5], M(runner_d, "<init>", "V", [CTX, STR, "Z"])),
        ("invoke-direct", [1, 2], THREAD_INIT),
        ("invoke-virtual", [1], THREAD_START),
        ("return-void",),
    ])
    cls.method("b", "V", [CTX, STR, STR], ACC_STATIC | ACC_SYNTHETIC, registers=12, code=[
        ("label", "try_start"),
        ("sget-object", 0, loader_field),
        ("if-nez", 0, "have_loader"),
        ("new-instance", 0, SB),
        ("invoke-virtual", [9], M(CTX, "getFilesDir", FILE)),
        ("move-result-object", 1),
        ("invoke-virtual", [1], M(FILE, "getAbsolutePath", STR)),
        ("move-result-object", 1),
        ("invoke-static", [1], STR_VALUEOF),
        ("move-result-object", 1),
        ("invoke-direct", [0, 1], SB_INIT),
        ("sget-object", 1, F(FILE, "separator", STR)),
        ("invoke-virtual", [0, 1], SB_APPEND),
        ("move-result-object", 0),
        ("sget-object", 1, root_file),
        ("invoke-virtual", [0, 1], SB_APPEND),
        ("move-result-object", 0),
        ("invoke-virtual", [0], SB_TOSTRING),
        ("move-result-object", 2),
        ("invoke-virtual", [9], M(CTX, "getFilesDir", FILE)),
        ("move-result-object", 1),
        ("invoke-virtual", [1], M(FILE, "getAbsolutePath", STR)),
        ("move-result-object", 3),
        ("new-instance", 4, SB),
        ("invoke-virtual", [9], M(CTX, "getApplicationInfo", APPINFO)),
        ("move-result-object", 5),
        ("iget-object", 5, 5, F(APPINFO, "nativeLibraryDir", STR)),
        ("invoke-static", [5], STR_VALUEOF),
        ("move-result-object", 5),
        ("invoke-direct", [4, 5], SB_INIT),
        ("const-string", 5, "/"),
        ("invoke-virtual", [4, 5], SB_APPEND),
        ("move-result-object", 4),
        ("invoke-virtual", [4], SB_TOSTRING),
        ("move-result-object", 4),
        ("invoke-static", [], M(CL, "getSystemClassLoader", CL)),
        ("move-result-object", 5),
        ("new-instance", 0, DCL),
        ("invoke-direct", [0, 2, 3, 4, 5], M(DCL, "<init>", "V", [STR, STR, STR, CL])),
        ("sput-object", 0, loader_field),
        ("label", "have_loader"),
        ("sget-object", 0, loader_field),
        ("const-string", 1, "cn.engine.RootPermApi"),
        ("invoke-virtual", [0, 1], M(DCL, "loadClass", CLS, [STR])),
        ("move-result-object", 1),
        ("const/4", 2, 0),
        ("new-array", 3, 2, "[" + CLS),
        ("invoke-virtual", [1, 3], M(CLS, "getConstructor", CTOR, ["[" + CLS])),
        ("move-result-object", 3),
        ("new-array", 4, 2, "[" + OBJ),
        ("invoke-virtual", [3, 4], M(CTOR, "newInstance", OBJ, ["[" + OBJ])),
        ("move-result-object", 3),
        ("const-string", 4, "initRoot"),
        ("const/4", 5, 3),
        ("new-array", 5, 5, "[" + CLS),
        ("const-class", 6, CTX),
        ("aput-object", 6, 5, 2),
        ("const/4", 6, 1),
        ("const-class", 7, STR),
        ("aput-object", 7, 5, 6),
        ("const/4", 6, 2),
        ("aput-object", 7, 5, 6),
        ("invoke-virtual", [1, 4, 5], M(CLS, "getMethod", METH, [STR, "[" + CLS])),
        ("move-result-object", 1),
        ("const/4", 4, 1),
        ("invoke-virtual", [1, 4], M(AO, "setAccessible", "V", ["Z"])),
        ("const/4", 4, 3),
        ("new-array", 4, 4, "[" + OBJ),
        ("aput-object", 9, 4, 2),
        ("const/4", 5, 1),
        ("aput-object", 10, 4, 5),
        ("const/4", 5, 2),
        ("aput-object", 11, 4, 5),
        ("invoke-virtual", [1, 3, 4], M(METH, "invoke", OBJ, [OBJ, "[" + OBJ])),
        ("label", "try_end"),
        ("return-void",),
        ("label", "handler"),
        ("move-exception", 0),
        ("invoke-virtual", [0], M(EXC, "printStackTrace")),
        ("return-void",),
    ], tries=[{"start": "try_start", "end": "try_end", "handlers": [(EXC, "handler")]}])

    # Runnable that forwards into b()
    rc = dex.add_class(runner_c, ACC_FINAL, interfaces=[RUNNABLE])
    f_ctx = rc.field("ctx", CTX, ACC_PRIVATE | ACC_FINAL)
    f_s1 = rc.field("s1", STR, ACC_PRIVATE | ACC_FINAL)
    f_s2 = rc.field("s2", STR, ACC_PRIVATE | ACC_FINAL)
    rc.method("<init>", "V", [CTX, STR, STR], ACC_PUBLIC, registers=4, code=[
        ("invoke-direct", [0], OBJ_INIT),
        ("iput-object", 1, 0, f_ctx),
        ("iput-object", 2, 0, f_s1),
        ("iput-object", 3, 0, f_s2),
        ("return-void",),
    ])
    rc.method("run", "V", [], ACC_PUBLIC, registers=4, code=[
        ("iget-object", 0, 3, f_ctx),
        ("iget-object", 1, 3, f_s1),
        ("iget-object", 2, 3, f_s2),
        ("invoke-static", [0, 1, 2], b),
        ("return-void",),
    ])

    rd = dex.add_class(runner_d, ACC_FINAL, interfaces=[RUNNABLE])
    g_ctx = rd.field("ctx", CTX, ACC_PRIVATE | ACC_FINAL)
    g_s = rd.field("cmd", STR, ACC_PRIVATE | ACC_FINAL)
    g_flag = rd.field("flag", "Z", ACC_PRIVATE | ACC_FINAL)
    rd.method("<init>", "V", [CTX, STR, "Z"], ACC_PUBLIC, registers=4, code=[
        ("invoke-direct", [0], OBJ_INIT),
        ("iput-object", 1, 0, g_ctx),
        ("iput-object", 2, 0, g_s),
        ("iput-boolean", 3, 0, g_flag),
        ("return-void",),
    ])
    rd.method("run", "V", [], ACC_PUBLIC, registers=3, code=[
        ("const-string", 0, "RootWorker"),
        ("iget-object", 1, 2, g_s),
        ("invoke-static", [0, 1], LOG_I),
        ("return-void",),
    ])
    return desc


def add_download_service(dex, pkg="com.dm.service"):
    p = pkg.replace(".", "/")
    handler = dex.add_class("L%s/DownloadingServiceHandler;" % p, ACC_PUBLIC, superclass=HANDLER,
                            source_file="DownloadingServiceHandler.java")
    queue = "L%s/DownloadQueue;" % p
    handler.method("<init>", access=ACC_PUBLIC, registers=1, code=[
        ("invoke-direct", [0], M(HANDLER, "<init>")),
        ("return-void",),
    ])
    handler.method("handleMessage", "V", [MSG], ACC_PUBLIC, registers=5, code=[
        ("iget", 0, 4, F(MSG, "what", "I")),
        ("label", "sw"),
        ("packed-switch", 0, "cases"),
        ("const-string", 1, "DownloadHandler"),
        ("const-string", 2, "unknown message"),
        ("invoke-static", [1, 2], LOG_W),
        ("return-void",),
        ("label", "case0"),
        ("const-string", 1, "DownloadHandler"),
        ("const-string", 2, "queue download"),
        ("invoke-static", [1, 2], LOG_D),
        ("return-void",),
        ("label", "case1"),
        ("const-string", 1, "DownloadHandler"),
        ("const-string", 2, "download complete"),
        ("invoke-static", [1, 2], LOG_D),
        ("return-void",),
        ("packed-switch-payload", "cases", "sw", 0, ["case0", "case1"]),
    ])
    q = dex.add_class(queue, ACC_PUBLIC)
    prio = q.field("priorities", "[I", ACC_PRIVATE)
    q.method("<init>", access=ACC_PUBLIC, registers=3, code=[
        ("invoke-direct", [2], OBJ_INIT),
        ("const/4", 0, 4),
        ("new-array", 0, 0, "[I"),
        ("fill-array-data", 0, "prio"),
        ("iput-object", 0, 2, prio),
        ("return-void",),
        ("fill-array-payload", "prio", 4, [10, 20, 30, 40]),
    ])
    q.method("size", "I", [], ACC_PUBLIC, registers=2, code=[
        ("iget-object", 0, 1, prio),
        ("array-length", 0, 0),
        ("return", 0),
    ])


def add_notes_app(dex, pkg="com.example.notes", title="Notes", greeting="Café ☕ \U0001F4DD"):
    p = pkg.replace(".", "/")
    store_t = "L%s/NoteStore;" % p
    store = dex.add_class(store_t, ACC_PUBLIC, source_file="NoteStore.java")
    notes = store.field("notes", LIST, ACC_PRIVATE | ACC_FINAL)
    store.method("<init>", access=ACC_PUBLIC, registers=2, code=[
        ("invoke-direct", [1], OBJ_INIT),
        ("new-instance", 0, LIST),
        ("invoke-direct", [0], M(LIST, "<init>")),
        ("iput-object", 0, 1, notes),
        ("return-void",),
    ])
    store.method("add", "V", [STR], ACC_PUBLIC, registers=4, code=[
        ("iget-object", 0, 2, notes),
        ("invoke-virtual", [3], M(STR, "trim", STR)),
        ("move-result-object", 1),
        ("invoke-virtual", [0, 1], M(LIST, "add", "Z", [OBJ])),
        ("const-string", 0, title),
        ("const-string", 1, "note added"),
        ("invoke-static", [0, 1], LOG_D),
        ("return-void",),
    ])
    store.method("count", "I", [], ACC_PUBLIC, registers=2, code=[
        ("iget-object", 0, 1, notes),
        ("invoke-virtual", [0], M(LIST, "size", "I")),
        ("move-result", 0),
        ("return", 0),
    ])
    store.method("describe", STR, [], ACC_PUBLIC, registers=3, code=[
        ("new-instance", 0, SB),
        ("const-string", 1, greeting),
        ("invoke-direct", [0, 1], SB_INIT),
        ("invoke-virtual", [2], M(store_t, "count", "I")),
        ("move-result", 1),
        ("invoke-virtual", [0, 1], SB_APPEND_I),
        ("move-result-object", 0),
        ("invoke-virtual", [0], SB_TOSTRING),
        ("move-result-object", 0),
        ("return-object", 0),
    ])
    act = dex.add_class("L%s/ui/MainActivity;" % p, ACC_PUBLIC, superclass=ACTIVITY,
                        source_file="MainActivity.java")
    store_field = act.field("store", store_t, ACC_PRIVATE)
    act.method("<init>", access=ACC_PUBLIC, registers=1, code=[
        ("invoke-direct", [0], M(ACTIVITY, "<init>")),
        ("return-void",),
    ])
    act.method("onCreate", "V", [BUNDLE], ACC_PROTECTED, registers=4, code=[
        ("invoke-super", [2, 3], M(ACTIVITY, "onCreate", "V", [BUNDLE])),
        ("const/high16", 0, 0x7f03),
        ("invoke-virtual", [2, 0], M(ACTIVITY, "setContentView", "V", ["I"])),
        ("new-instance", 0, store_t),
        ("invoke-direct", [0], M(store_t, "<init>")),
        ("iput-object", 0, 2, store_field),
        ("const-string", 1, "welcome"),
        ("invoke-virtual", [0, 1], M(store_t, "add", "V", [STR])),
        ("return-void",),
    ])


def add_shapes(dex):
    shape = dex.add_class("Lcom/shapes/Shape;", ACC_PUBLIC | ACC_INTERFACE | ACC_ABSTRACT)
    shape.method("area", "D", [], ACC_PUBLIC | ACC_ABSTRACT)
    shape.method("name", STR, [], ACC_PUBLIC | ACC_ABSTRACT)

    base = dex.add_class("Lcom/shapes/Base;", ACC_PUBLIC | ACC_ABSTRACT, interfaces=["Lcom/shapes/Shape;"])
    trivial_init(base)
    base.method("describe", STR, [], ACC_PUBLIC | ACC_ABSTRACT)
    base.method("toString", STR, [], ACC_PUBLIC, registers=2, code=[
        ("invoke-virtual", [1], M("Lcom/shapes/Base;", "describe", STR)),
        ("move-result-object", 0),
        ("return-object", 0),
    ])

    circle_t = "Lcom/shapes/Circle;"
    circle = dex.add_class(circle_t, ACC_PUBLIC, superclass="Lcom/shapes/Base;")
    radius = circle.field("radius", "D", ACC_PRIVATE | ACC_FINAL)
    circle.method("<init>", "V", ["D"], ACC_PUBLIC, registers=3, code=[
        ("invoke-direct", [0], M("Lcom/shapes/Base;", "<init>")),
        ("iput-wide", 1, 0, radius),
        ("return-void",),
    ])
    circle.method("area", "D", [], ACC_PUBLIC, registers=5, code=[
        ("const-wide", 0, 0x400921FB54442D18),
        ("iget-wide", 2, 4, radius),
        ("mul-double", 0, 0, 2),
        ("mul-double/2addr", 0, 2),
        ("return-wide", 0),
    ])
    circle.method("name", STR, [], ACC_PUBLIC, registers=2, code=[
        ("const-string/jumbo", 0, "circle"),
        ("return-object", 0),
    ])
    circle.method("describe", STR, [], ACC_PUBLIC, registers=2, code=[
        ("const-string", 0, "a round shape"),
        ("return-object", 0),
    ])

    main = dex.add_class("LMain;", ACC_PUBLIC, source_file="Main.java")
    main.method("main", "V", ["[" + STR], ACC_PUBLIC | ACC_STATIC, registers=3, code=[
        ("sget-object", 0, F(SYSTEM, "out", PRINTSTREAM)),
        ("const-string", 1, "hello"),
        ("invoke-virtual", [0, 1], M(PRINTSTREAM, "println", "V", [STR])),
        ("const/16", 0, 1000),
        ("invoke-static", [0], M("LMain;", "classify", STR, ["I"])),
        ("return-void",),
    ])
    main.method("nativeHash", "I", [STR], ACC_PUBLIC | ACC_STATIC | ACC_NATIVE)
    main.method("classify", STR, ["I"], ACC_PUBLIC | ACC_STATIC, registers=2, code=[
        ("label", "sw"),
        ("sparse-switch", 1, "table"),
        ("const-string", 0, "other"),
        ("goto", "done"),
        ("label", "small"),
        ("const-string", 0, "ten"),
        ("goto/16", "done"),
        ("label", "mid"),
        ("const-string", 0, "hundred"),
        ("goto/32", "done"),
        ("label", "big"),
        ("const-string", 0, "thousand"),
        ("label", "done"),
        ("return-object", 0),
        ("sparse-switch-payload", "table", "sw", [(10, "small"), (100, "mid"), (1000, "big")]),
    ])


def add_format_zoo(dex):
    """Exercises every instruction format the assembler knows."""
    t = "Lorg/zoo/Formats;"
    z = dex.add_class(t, ACC_PUBLIC)
    counter = z.field("counter", "I", ACC_PRIVATE | ACC_STATIC)
    z.method("mix", "J", ["I", "J"], ACC_PUBLIC | ACC_STATIC, registers=20, code=[
        ("const/4", 0, -3),
        ("const/16", 1, -200),
        ("const", 2, 0x12345678),
        ("const/high16", 3, 0x4120),
        ("const-wide/16", 4, 7),
        ("const-wide/32", 6, -100000),
        ("const-wide/high16", 8, 0x4024),
        ("move/from16", 10, 17),
        ("move/16", 11, 10),
        ("move", 12, 0),
        ("move-wide", 14, 4),
        ("add-int", 0, 0, 1),
        ("sub-int", 0, 0, 2),
        ("mul-int", 0, 0, 1),
        ("add-int/2addr", 0, 1),
        ("add-int/lit16", 0, 0, 1234),
        ("add-int/lit8", 0, 0, -5),
        ("mul-int/lit8", 0, 0, 3),
        ("and-int/lit8", 0, 0, 0x7f),
        ("neg-int", 1, 0),
        ("int-to-char", 1, 1),
        ("add-long", 4, 4, 6),
        ("cmp-long", 0, 4, 18),
        ("if-ltz", 0, "neg"),
        ("if-eq", 0, 1, "neg"),
        ("if-ge", 0, 1, "neg"),
        ("sget", 1, counter),
        ("add-int/lit8", 1, 1, 1),
        ("sput", 1, counter),
        ("label", "neg"),
        ("filled-new-array", [0, 1], "[I"),
        ("move-result-object", 2),
        ("filled-new-array/range", 0, 2, "[I"),
        ("move-result-object", 3),
        ("instance-of", 2, 3, "[I"),
        ("check-cast", 3, "[I"),
        ("const/4", 1, 0),
        ("aget", 2, 3, 1),
        ("aput", 2, 3, 1),
        ("monitor-enter", 3),
        ("monitor-exit", 3),
        ("invoke-static/range", 0, 3, M(t, "helper", "I", ["I", "I", "I"])),
        ("move-result", 0),
        ("invoke-virtual/range", 16, 1, M(OBJ, "hashCode", "I")),
        ("move-result", 0),
        ("return-wide", 4),
    ])
    z.method("helper", "I", ["I", "I", "I"], ACC_PRIVATE | ACC_STATIC, registers=3, code=[
        ("add-int", 0, 0, 1),
        ("add-int", 0, 0, 2),
        ("return", 0),
    ])
    z.method("fail", "V", [], ACC_PUBLIC | ACC_STATIC, registers=2, code=[
        ("new-instance", 0, "Ljava/lang/IllegalStateException;"),
        ("const-string", 1, "boom"),
        ("invoke-direct", [0, 1], M("Ljava/lang/IllegalStateException;", "<init>", "V", [STR])),
        ("throw", 0),
    ])


def write_apk(path, dex_blobs, extra=None):
    entries = [("AndroidManifest.xml", b"\x03\x00\x08\x00" + b"\x00" * 60, zipfile.ZIP_DEFLATED)]
    for i, blob in enumerate(dex_blobs):
        name = "classes.dex" if i == 0 else "classes%d.dex" % (i + 1)
        entries.append((name, blob, zipfile.ZIP_DEFLATED))
    entries.append(("resources.arsc", b"\x02\x00\x0c\x00" + b"\x00" * 28, zipfile.ZIP_STORED))
    entries.append(("res/layout/main.xml", b"\x03\x00\x08\x00" + b"\x00" * 20, zipfile.ZIP_DEFLATED))
    entries += extra or []
    with zipfile.ZipFile(path, "w") as zf:
        for name, data, method in entries:
            info = zipfile.ZipInfo(name, date_time=(2020, 1, 1, 0, 0, 0))
            info.compress_type = method
            info.external_attr = 0o644 << 16
            zf.writestr(info, data)


def write(path, data):
    with open(path, "wb") as f:
        f.write(data)


def rooting_dex():
    d = DexBuilder()
    add_rooting_class(d, "cn.utils", "RTUtils")
    add_download_service(d)
    return d.build()


def notes_dex():
    d = DexBuilder()
    add_notes_app(d)
    return d.build()


def shapes_dex():
    d = DexBuilder()
    add_shapes(d)
    return d.build()


def zoo_dex():
    d = DexBuilder()
    add_format_zoo(d)
    add_download_service(d, "org.zoo.net")
    return d.build()


def multidex_pair():
    a = DexBuilder()
    eng = a.add_class("Lcom/multi/core/Engine;", ACC_PUBLIC)
    trivial_init(eng)
    eng.method("run", "V", [STR], ACC_PUBLIC, registers=4, code=[
        ("const-string", 0, "Engine"),
        ("invoke-static", [0, 3], LOG_I),
        ("return-void",),
    ])
    b = DexBuilder()
    plug = b.add_class("Lcom/multi/ext/Plugin;", ACC_PUBLIC)
    trivial_init(plug)
    plug.method("start", "V", [], ACC_PUBLIC, registers=3, code=[
        ("new-instance", 0, "Lcom/multi/core/Engine;"),
        ("invoke-direct", [0], M("Lcom/multi/core/Engine;", "<init>")),
        ("const-string", 1, "plugin started"),
        ("invoke-virtual", [0, 1], M("Lcom/multi/core/Engine;", "run", "V", [STR])),
        ("return-void",),
    ])
    return a.build(), b.build()


def odd_dex():
    """Unknown opcode and an empty code item; not expected to satisfy a verifier."""
    d = DexBuilder()
    c = d.add_class("Lcom/odd/Patched;", ACC_PUBLIC)
    c.method("weird", "V", [], ACC_PUBLIC | ACC_STATIC, registers=1, raw_units=[0x003E, 0x0012, 0x000E])
    c.method("empty", "V", [], ACC_PUBLIC | ACC_STATIC, registers=0, raw_units=[])
    c.method("truncated", "V", [], ACC_PUBLIC | ACC_STATIC, registers=1, raw_units=[0x001A])
    return d.build()


MAL_VARIANTS = [
    ("cn.utils", "RTUtils", True),
    ("com.sys.update", "SysPatcher", False),
    ("org.helper.core", "CoreHelper", True),
    ("net.cfg.loader", "CfgLoader", False),
    ("io.svc.boot", "BootAgent", True),
]

BEN_VARIANTS = [
    ("com.example.notes", "Notes", "Welcome back"),
    ("org.tasks.list", "Tasks", "Task list ready"),
    ("net.weather.app", "Weather", "Forecast loaded"),
    ("io.recipes.book", "Recipes", "Bon appétit"),
    ("com.fitness.steps", "Steps", "Keep moving"),
]


def corpus():
    out = os.path.join(OUT, "corpus")
    os.makedirs(out, exist_ok=True)
    rows = ["path,label"]
    for i, (pkg, name, with_exec) in enumerate(MAL_VARIANTS, 1):
        d = DexBuilder()
        add_rooting_class(d, pkg, name, with_exec=with_exec)
        add_download_service(d, pkg.rsplit(".", 1)[0] + ".service")
        fname = "sample_mal_%02d.apk" % i
        write_apk(os.path.join(out, fname), [d.build()])
        rows.append("%s,MALWARE" % fname)
    for i, (pkg, title, greeting) in enumerate(BEN_VARIANTS, 1):
        d = DexBuilder()
        add_notes_app(d, pkg, title, greeting)
        if i % 2:
            add_download_service(d, pkg + ".net")
        fname = "sample_ben_%02d.apk" % i
        write_apk(os.path.join(out, fname), [d.build()])
        rows.append("%s,BENIGN" % fname)
    write(os.path.join(out, "manifest.csv"), ("\n".join(rows) + "\n").encode())
    # Reduced corpus: two of each.
    small = [rows[0], rows[1], rows[2], rows[6], rows[7]]
    write(os.path.join(out, "manifest_small.csv"), ("\n".join(small) + "\n").encode())


def corrupt_size_apk(path, blob):
    write_apk(path, [blob])
    data = bytearray(open(path, "rb").read())
    name = b"classes.dex"
    # local header: uncompressed size at +22; central directory at +24
    lh = data.find(b"PK\x03\x04" + b"\x14\x00")
    while lh != -1:
        n = struct.unpack_from("<H", data, lh + 26)[0]
        if data[lh + 30:lh + 30 + n] == name:
            size = struct.unpack_from("<I", data, lh + 22)[0]
            struct.pack_into("<I", data, lh + 22, size + 16)
        lh = data.find(b"PK\x03\x04", lh + 4)
    cd = data.find(b"PK\x01\x02")
    while cd != -1:
        n = struct.unpack_from("<H", data, cd + 28)[0]
        if data[cd + 46:cd + 46 + n] == name:
            size = struct.unpack_from("<I", data, cd + 24)[0]
            struct.pack_into("<I", data, cd + 24, size + 16)
        cd = data.find(b"PK\x01\x02", cd + 4)
    write(path, bytes(data))


def main():
    dex_dir = os.path.join(OUT, "dex")
    apk_dir = os.path.join(OUT, "apk")
    os.makedirs(dex_dir, exist_ok=True)
    os.makedirs(apk_dir, exist_ok=True)

    rooting = rooting_dex()
    notes = notes_dex()
    shapes = shapes_dex()
    zoo = zoo_dex()
    multi_a, multi_b = multidex_pair()
    for name, blob in [("rooting.dex", rooting), ("notes.dex", notes), ("shapes.dex", shapes),
                       ("zoo.dex", zoo), ("multi_core.dex", multi_a), ("multi_ext.dex", multi_b)]:
        write(os.path.join(dex_dir, name), blob)
    write(os.path.join(dex_dir, "odd.dex"), odd_dex())

    flipped = bytearray(notes)
    flipped[len(flipped) // 2] ^= 0x01
    write(os.path.join(dex_dir, "notes_flipped.dex"), bytes(flipped))

    write_apk(os.path.join(apk_dir, "rooting.apk"), [rooting])
    write_apk(os.path.join(apk_dir, "notes.apk"), [notes])
    write_apk(os.path.join(apk_dir, "shapes.apk"), [shapes])
    write_apk(os.path.join(apk_dir, "multidex.apk"), [multi_a, multi_b])
    write_apk(os.path.join(apk_dir, "nodex.apk"), [])
    corrupt_size_apk(os.path.join(apk_dir, "corrupt_size.apk"), notes)
    write(os.path.join(apk_dir, "not_a_zip.apk"), b"This is not a zip archive at all.\n" * 4)
    corpus()


if __name__ == "__main__":
    main()
