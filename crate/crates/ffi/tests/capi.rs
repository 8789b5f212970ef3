use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use efgame_ffi::*;

const L1: &str = "structure L1\nuniverse 1\nrelation < 2\nend\n";
const L2: &str = "structure L2\nuniverse 2\nrelation < 2\n0 1\nend\n";
const C4: &str = "structure C4\nuniverse 4\nrelation E 2\n0 1\n1 0\n1 2\n2 1\n2 3\n3 2\n3 0\n0 3\nend\n";

fn parse(text: &str) -> *mut EfStructure {
    let c = CString::new(text).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ef_structure_parse(c.as_ptr(), &mut out) }, EfStatus::Ok);
    out
}

fn last_error() -> String {
    let p = ef_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
    unsafe { ef_string_free(p) };
    s
}

#[test]
fn structures_round_trip() {
    let s = parse("# comment\nstructure C4\nuniverse 4\nrelation E 2\n3 0\n0 1\nend\n");
    let mut size = 0;
    assert_eq!(unsafe { ef_structure_size(s, &mut size) }, EfStatus::Ok);
    assert_eq!(size, 4);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { ef_structure_to_text(s, &mut text) }, EfStatus::Ok);
    assert_eq!(
        take_string(text),
        "structure C4\nuniverse 4\nrelation E 2\n0 1\n3 0\nend\n"
    );
    unsafe { ef_structure_free(s) };
}

#[test]
fn parse_failures() {
    let mut out = ptr::null_mut();
    let bad = CString::new("structure x\nuniverse 2\nrelation < 2\n0 5\nend\n").unwrap();
    assert_eq!(
        unsafe { ef_structure_parse(bad.as_ptr(), &mut out) },
        EfStatus::ParseError
    );
    assert!(out.is_null());
    assert!(last_error().starts_with("line 4"), "{}", last_error());
    assert_eq!(
        unsafe { ef_structure_parse(ptr::null(), &mut out) },
        EfStatus::NullPointer
    );
    let invalid = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { ef_structure_parse(invalid.as_ptr().cast(), &mut out) },
        EfStatus::InvalidUtf8
    );
    let ok = CString::new(L1).unwrap();
    assert_eq!(
        unsafe { ef_structure_parse(ok.as_ptr(), ptr::null_mut()) },
        EfStatus::NullPointer
    );
    let s = parse(L1);
    assert!(ef_last_error_message().is_null());
    unsafe { ef_structure_free(s) };
}

#[test]
fn equivalence_queries() {
    let (a, b, c) = (parse(L1), parse(L2), parse(C4));
    let mut eq = false;
    assert_eq!(unsafe { ef_n_equivalent(a, b, 1, &mut eq) }, EfStatus::Ok);
    assert!(eq);
    assert_eq!(unsafe { ef_n_equivalent(a, b, 2, &mut eq) }, EfStatus::Ok);
    assert!(!eq);
    let mut level = 99;
    assert_eq!(unsafe { ef_separation_level(a, b, 4, &mut level) }, EfStatus::Ok);
    assert_eq!(level, 2);
    assert_eq!(unsafe { ef_separation_level(a, a, 4, &mut level) }, EfStatus::Ok);
    assert_eq!(level, 0);
    assert_eq!(
        unsafe { ef_n_equivalent(a, c, 1, &mut eq) },
        EfStatus::SignatureMismatch
    );

    let mut phi = ptr::null_mut();
    assert_eq!(unsafe { ef_distinguishing_sentence(b, a, 3, &mut phi) }, EfStatus::Ok);
    let text = take_string(phi);
    let expect = efgame::fo::distinguishing_sentence(
        &efgame::parse_structure(L2).unwrap(),
        &efgame::parse_structure(L1).unwrap(),
        3,
    )
    .unwrap()
    .unwrap()
    .to_string();
    assert_eq!(text, expect);
    assert_eq!(unsafe { ef_distinguishing_sentence(a, b, 1, &mut phi) }, EfStatus::Ok);
    assert!(phi.is_null());

    let mut w = EfPlayer::Duplicator;
    assert_eq!(unsafe { ef_solve_winner(a, b, 2, &mut w) }, EfStatus::Ok);
    assert_eq!(w, EfPlayer::Spoiler);
    assert_eq!(unsafe { ef_solve_winner(a, b, 1, &mut w) }, EfStatus::Ok);
    assert_eq!(w, EfPlayer::Duplicator);
    assert_eq!(
        unsafe { ef_solve_winner(ptr::null(), b, 1, &mut w) },
        EfStatus::NullPointer
    );
    for s in [a, b, c] {
        unsafe { ef_structure_free(s) };
    }
}

#[test]
fn game_handles() {
    let (a, b) = (parse(L1), parse(L2));
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { ef_game_new(a, b, 2, &mut g) }, EfStatus::Ok);
    // the game outlives the structure handles
    unsafe {
        ef_structure_free(a);
        ef_structure_free(b);
    }
    let mut w = EfPlayer::Duplicator;
    assert_eq!(unsafe { ef_game_winner(g, &mut w) }, EfStatus::GameNotOver);

    let mut p = EfPlayer::Duplicator;
    assert_eq!(unsafe { ef_game_to_move(g, &mut p) }, EfStatus::Ok);
    assert_eq!(p, EfPlayer::Spoiler);
    let bad = EfMove {
        side: EfSide::Right,
        element: 7,
    };
    assert_ne!(unsafe { ef_game_apply(g, bad) }, EfStatus::Ok);
    assert!(!last_error().is_empty());

    let mut mv = EfMove {
        side: EfSide::Left,
        element: 9,
    };
    assert_eq!(unsafe { ef_game_best_move(g, &mut mv) }, EfStatus::Ok);
    assert_eq!(
        mv,
        EfMove {
            side: EfSide::Left,
            element: 0
        }
    );
    assert_eq!(unsafe { ef_game_apply(g, mv) }, EfStatus::Ok);
    // answering on the side Spoiler just used is illegal
    assert_eq!(
        unsafe {
            ef_game_apply(
                g,
                EfMove {
                    side: EfSide::Left,
                    element: 0,
                },
            )
        },
        EfStatus::IllegalMove
    );

    let mut over = false;
    let mut rounds = 0;
    loop {
        assert_eq!(unsafe { ef_game_is_over(g, &mut over) }, EfStatus::Ok);
        if over {
            break;
        }
        assert_eq!(unsafe { ef_game_best_move(g, &mut mv) }, EfStatus::Ok);
        assert_eq!(unsafe { ef_game_apply(g, mv) }, EfStatus::Ok);
    }
    assert_eq!(unsafe { ef_game_rounds_done(g, &mut rounds) }, EfStatus::Ok);
    assert_eq!(rounds, 2);
    assert_eq!(unsafe { ef_game_winner(g, &mut w) }, EfStatus::Ok);
    assert_eq!(w, EfPlayer::Spoiler);
    assert_eq!(unsafe { ef_game_to_move(g, &mut p) }, EfStatus::GameOver);
    assert_eq!(unsafe { ef_game_best_move(g, &mut mv) }, EfStatus::GameOver);
    unsafe { ef_game_free(g) };
    unsafe { ef_game_free(ptr::null_mut()) };
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/efgame.h")).unwrap();
    let source = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| {
            let l = l.trim_start();
            l.strip_prefix("pub unsafe extern \"C\" fn ")
                .or_else(|| l.strip_prefix("pub extern \"C\" fn "))
        })
        .map(|l| &l[..l.find('(').unwrap()])
        .collect();
    assert!(exports.len() >= 18);
    for name in exports {
        let declared = header.lines().any(|l| {
            l.find(&format!("{name}("))
                .is_some_and(|i| i > 0 && matches!(l.as_bytes()[i - 1], b' ' | b'*'))
        });
        assert!(declared, "{name} missing from header");
    }
    for ty in [
        "typedef struct EfStructure EfStructure;",
        "typedef struct EfGame EfGame;",
        "EF_STATUS_OK = 0",
    ] {
        assert!(header.contains(ty), "{ty}");
    }
}

fn target_dir() -> PathBuf {
    // tests run from <target>/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = target_dir().join("libefgame_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let out = std::env::temp_dir().join(format!("efgame_smoke_{}", std::process::id()));
    let status = Command::new("cc")
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    let _ = std::fs::remove_file(Path::new(&out));
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(run.stdout, b"ok\n");
}
