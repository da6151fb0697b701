from typing import Any, Sequence

from ..models.canon import CanonicalForm, same_class
from ..models.exactmat import Matrix, Scalar


def check_scalar_equal(true_s: Any, target_s: Any, var_name: str = "") -> bool:
    """
    2つの厳密なスカラーtrue_sとtarget_sが等しいかを比較する
    """
    true_s, target_s = Scalar.coerce(true_s), Scalar.coerce(target_s)
    assert true_s == target_s, "\n".join([
        f"{var_name}の値が異なります.",
        f"計算結果: {target_s}, 正答: {true_s}",
    ])
    return True


def check_scalars_equal(true_seq: Sequence[Any], target_seq: Sequence[Any], var_name: str = "") -> bool:
    """
    スカラー列を先頭から比較する
    """
    assert len(true_seq) == len(target_seq), "\n".join([
        f"{var_name}の長さが異なります.",
        f"計算結果: {len(target_seq)}, 正答: {len(true_seq)}",
    ])
    for k, (t, s) in enumerate(zip(true_seq, target_seq)):
        check_scalar_equal(t, s, f"{var_name}[{k}]")
    return True


def check_matrix_equal(true_m: Matrix, target_m: Matrix, var_name: str = "") -> bool:
    """
    true_mとtarget_mの行列が厳密に等しいかを比較する
    """
    assert isinstance(true_m, Matrix), "true_mにはMatrixを代入してください"
    assert isinstance(target_m, Matrix), f"{var_name}にはMatrixを格納してください"

    assert true_m == target_m, "\n".join([
        f"{var_name}の値が異なります.",
        "正しい値:",
        f"{true_m}",
        "計算結果:",
        f"{target_m}",
    ])
    return True


def check_form_equal(true_cf: CanonicalForm, target_cf: CanonicalForm,
                     var_name: str = "", up_to_centralizer: bool = True) -> bool:
    """
    標準形true_cfとtarget_cfが等しいかを比較する

    Parameters
    ----------
    true_cf: CanonicalForm
        比較の際に想定される標準形
    target_cf: CanonicalForm
        実際に比較したい標準形
    var_name: str
        エラーの際に表示したい変数名
    up_to_centralizer: bool
        Trueの場合, Jと可換な相似変換の違いは同一とみなす
    """
    if up_to_centralizer:
        ok = same_class(true_cf, target_cf)
    else:
        ok = true_cf == target_cf
    assert ok, "\n".join([
        f"{var_name}の標準形が異なります.",
        f"正しい値: {true_cf}",
        f"計算結果: {target_cf}",
    ])
    return True


def check_verdict(true_v: str, target_v: str, var_name: str = "") -> bool:
    assert true_v == target_v, f"{var_name}の判定が異なります. 計算結果: {target_v}, 正答: {true_v}"
    return True
